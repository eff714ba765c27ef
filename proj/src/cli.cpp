#include "bacsum/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bacsum/error.hpp"
#include "bacsum/eval.hpp"
#include "bacsum/pipeline.hpp"
#include "bacsum/registry.hpp"
#include "bacsum/render.hpp"

namespace bacsum {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string mode;
  std::optional<std::uint16_t> port;
  std::optional<std::size_t> budget;
  std::string out_path;
  bool stub_llm = false;
  bool link_header = false;
  std::string input;
};

int fail(std::ostream& err, std::string_view stage, const Error& e) {
  err << fmt::format("bacsum: {}: {}: {}\n", stage, to_string(e.kind()), e.what());
  return exit_code_for(e.kind());
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, fmt::format("failed writing '{}'", path.string()));
}

PipelineConfig config_from(const Options& o) {
  PipelineConfig config;
  if (!o.config_path.empty()) config = load_pipeline_config(o.config_path);
  if (!o.mode.empty()) {
    const auto mode = parse_mode(o.mode);
    if (!mode) throw Error(ErrorKind::Configuration, fmt::format("--mode '{}' is not m1..m4", o.mode));
    config.mode = *mode;
  }
  if (o.port) config.bacnet_port = *o.port;
  if (o.budget) {
    if (*o.budget == 0) throw Error(ErrorKind::Configuration, "--budget must be positive");
    config.budget = *o.budget;
  }
  return config;
}

std::int64_t build_timestamp() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    try {
      return std::stoll(epoch);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Configuration, "SOURCE_DATE_EPOCH is not an integer");
    }
  }
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

int cmd_decode(const Options& o, std::ostream& out, std::ostream& err) {
  std::string stage = "config";
  try {
    const PipelineConfig config = config_from(o);
    Registry registry;
    if (config.registry_path) {
      stage = "load_registry";
      registry = load_registry(*config.registry_path);
    }
    stage = "read_capture";
    const Bytes bytes = read_file_bytes(o.input);
    DecodeResult decoded = decode_capture(bytes, config.bacnet_port);
    if (decoded.stats.skipped() > 0 || decoded.non_bacnet > 0) {
      err << fmt::format("bacsum: read_capture: {} records, {} not IPv4/UDP, {} not BACnet/IP\n",
                         decoded.stats.records, decoded.stats.skipped(), decoded.non_bacnet);
    }
    for (const PacketStatus& s : decoded.statuses) {
      if (!s.ok) {
        err << fmt::format("bacsum: decode_packet: frame {}: {}: {} (skipped)\n", s.frame,
                           s.error_kind, s.message);
      }
    }
    stage = "annotate";
    for (auto& p : decoded.packets) p = annotate(p, registry);
    stage = "render";
    const std::string text =
        render_packet_text(decoded.packets, RenderOptions{.include_link_header = o.link_header});
    if (o.out_path.empty()) {
      out << text;
    } else {
      write_file(o.out_path, text);
    }
    return 0;
  } catch (const Error& e) {
    return fail(err, stage, e);
  }
}

int cmd_kb_build(const Options& o, std::ostream& out, std::ostream& err) {
  std::string stage = "config";
  try {
    const PipelineConfig config = config_from(o);
    fs::path target;
    if (!o.out_path.empty()) {
      target = o.out_path;
    } else if (config.index_path) {
      target = *config.index_path;
    } else {
      throw Error(ErrorKind::Configuration, "no index path: pass --out or set index_path");
    }
    auto provider = make_embedding_provider(config.embedding);
    stage = "build";
    const KbBuildResult built =
        build_knowledge_index(o.input, config.chunking, *provider, build_timestamp());
    stage = "save_index";
    save_index(built.index, target);
    out << fmt::format("indexed {} chunks from {} documents, dim {}, embedder {} -> {}\n",
                       built.index.size(), built.documents, built.index.dim(),
                       built.index.metadata().embedder_id, target.string());
    return 0;
  } catch (const Error& e) {
    return fail(err, stage, e);
  }
}

int cmd_explain(const Options& o, std::ostream& out, std::ostream& err) {
  PipelineConfig config;
  try {
    config = config_from(o);
    if (!o.out_path.empty()) config.audit_path = fs::path(o.out_path);
  } catch (const Error& e) {
    return fail(err, "config", e);
  }
  fs::path audit_path = config.audit_path ? *config.audit_path
                                          : fs::path(o.input).replace_extension(".audit.json");

  EchoStubClient stub;
  const ExplainResult result = run_explain(o.input, config, o.stub_llm ? &stub : nullptr);
  try {
    write_file(audit_path, result.audit_json + "\n");
  } catch (const Error& e) {
    fail(err, "write_audit", e);
    if (result.ok) return exit_code_for(e.kind());
  }
  if (!result.ok) return fail(err, result.failed_stage, *result.error);
  out << result.summary_text << '\n';
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  std::string stage = "load_ratings";
  try {
    const auto records = load_ratings(o.input);
    stage = "aggregate";
    const auto scores = aggregate(records);
    out << render_scores_table(scores);
    if (!o.out_path.empty()) {
      stage = "write";
      write_file(o.out_path, scores_to_json(scores) + "\n");
    }
    return 0;
  } catch (const Error& e) {
    return fail(err, stage, e);
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decode BACnet/IP captures and summarize them with retrieved context", "bacsum"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bacsum 0.1.0");
  Options o;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "Pipeline configuration JSON")->check(CLI::ExistingFile);
  };

  auto* decode = app.add_subcommand("decode", "Print the formatted packet text of a capture");
  decode->add_option("pcap", o.input, "Classic pcap capture")->required();
  add_config(decode);
  decode->add_option("--port", o.port, "BACnet/IP UDP port (default 47808)");
  decode->add_option("--out", o.out_path, "Write the text here instead of stdout");
  decode->add_flag("--link-header", o.link_header, "Include IP, port and OUI lines per frame");

  auto* kb = app.add_subcommand("kb-build", "Chunk, embed and index a corpus directory");
  kb->add_option("corpus", o.input, "Directory of .md/.txt documents")->required();
  add_config(kb);
  kb->add_option("--out", o.out_path, "Index file (default: index_path from config)");

  auto* explain = app.add_subcommand("explain", "Summarize a capture through the full pipeline");
  explain->add_option("pcap", o.input, "Classic pcap capture")->required();
  add_config(explain);
  explain->add_option("--mode", o.mode, "Context mode")->check(CLI::IsMember({"m1", "m2", "m3", "m4"}));
  explain->add_option("--port", o.port, "BACnet/IP UDP port");
  explain->add_option("--budget", o.budget, "Context token budget");
  explain->add_option("--out", o.out_path, "Audit record path (default: <pcap>.audit.json)");
  explain->add_flag("--stub-llm", o.stub_llm, "Use the echo stub instead of the chat endpoint");

  auto* eval = app.add_subcommand("eval", "Aggregate CA/CI ratings into per-method means");
  eval->add_option("ratings", o.input, "Ratings CSV")->required();
  eval->add_option("--out", o.out_path, "Also write the scores as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  if (decode->parsed()) return cmd_decode(o, out, err);
  if (kb->parsed()) return cmd_kb_build(o, out, err);
  if (explain->parsed()) return cmd_explain(o, out, err);
  return cmd_eval(o, out, err);
}

}  // namespace bacsum
