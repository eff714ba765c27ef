#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bacsum/cli.hpp"
#include "bacsum/error.hpp"
#include "bacsum/eval.hpp"
#include "bacsum/hash.hpp"
#include "bacsum/pipeline.hpp"
#include "bacsum/registry.hpp"
#include "bacsum/render.hpp"
#include "bacsum/retrieval.hpp"

namespace py = pybind11;
using namespace bacsum;

namespace {

py::dict decode(const py::bytes& data, std::uint16_t port, const std::string& registry_path,
                bool link_header) {
  const std::string_view view = data;
  DecodeResult r = decode_capture(
      {reinterpret_cast<const std::uint8_t*>(view.data()), view.size()}, port);
  if (!registry_path.empty()) {
    const Registry registry = load_registry(registry_path);
    for (auto& p : r.packets) p = annotate(p, registry);
  }
  py::list failures;
  for (const auto& s : r.statuses) {
    if (!s.ok) failures.append(py::make_tuple(s.frame, s.error_kind, s.message));
  }
  py::dict out;
  out["text"] = render_packet_text(r.packets, {.include_link_header = link_header});
  out["packets"] = r.packets.size();
  out["records"] = r.stats.records;
  out["non_bacnet"] = r.non_bacnet;
  out["failures"] = failures;
  return out;
}

py::list score(const std::string& csv_text) {
  const auto records = parse_ratings(csv_text);
  py::list rows;
  for (const auto& s : aggregate(records)) {
    py::dict row;
    row["method"] = std::string(to_string(s.method));
    row["ci"] = s.mean_ci;
    row["ca"] = s.mean_ca;
    row["n"] = s.n;
    row["ci_display"] = format_mean(s.mean_ci);
    row["ca_display"] = format_mean(s.mean_ca);
    rows.append(row);
  }
  return rows;
}

std::string scores_table(const std::string& csv_text) {
  const auto records = parse_ratings(csv_text);
  return render_scores_table(aggregate(records));
}

std::vector<std::string> keywords(const std::string& text) {
  const KeywordSet set = extract_keywords(text);
  return {set.begin(), set.end()};
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"bacsum"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_bacsum, m) {
  m.doc() = "BACnet/IP capture decoding, rating aggregation and pipeline entry points";

  static py::exception<Error> error_type(m, "BacsumError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args are (kind, message)
      const py::tuple args = py::make_tuple(std::string(to_string(e.kind())), e.what());
      PyErr_SetObject(error_type.ptr(), args.ptr());
    }
  });

  m.def("decode", &decode, py::arg("data"), py::arg("port") = 47808,
        py::arg("registry_path") = "", py::arg("link_header") = false,
        "Decode pcap bytes into formatted packet text and counters.");
  m.def("score", &score, py::arg("csv_text"), "Per-method CI/CA means from a ratings CSV.");
  m.def("scores_table", &scores_table, py::arg("csv_text"));
  m.def("format_mean", &format_mean, py::arg("mean"));
  m.def(
      "cosine_similarity",
      [](const std::vector<float>& a, const std::vector<float>& b) {
        return cosine_similarity(a, b);
      },
      py::arg("a"), py::arg("b"));
  m.def("keywords", &keywords, py::arg("text"));
  m.def("estimate_tokens", &estimate_tokens, py::arg("text"));
  m.def(
      "sha256_hex", [](const std::string& text) { return sha256_hex(text); }, py::arg("text"));
  m.def("run_cli", &run_cli, py::arg("args"),
        "Run the command line tool in-process; returns (exit_code, stdout, stderr).");
}
