#include "bacsum/service_kb.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "bacsum/error.hpp"

namespace bacsum {
namespace {

using nlohmann::json;

std::size_t count_sentences(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      ++count;
    }
  }
  // A trailing fragment without terminal punctuation is still a sentence.
  const auto last = text.find_last_not_of(" \t\r\n");
  if (last != std::string_view::npos && text[last] != '.' && text[last] != '!' &&
      text[last] != '?') {
    ++count;
  }
  return count;
}

std::string_view class_name(ServiceClass cls) {
  return cls == ServiceClass::Confirmed ? "confirmed" : "unconfirmed";
}

}  // namespace

std::string normalize_service_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

ServiceKB ServiceKB::from_entries(std::vector<ServiceEntry> entries) {
  ServiceKB kb;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ServiceEntry& e = entries[i];
    if (e.service_name.empty()) {
      throw Error(ErrorKind::Validation, fmt::format("[{}].service_name: must not be empty", i));
    }
    if (e.summary.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw Error(ErrorKind::Validation,
                  fmt::format("[{}].summary: empty summary for '{}'", i, e.service_name));
    }
    if (count_sentences(e.summary) > kMaxSummarySentences) {
      throw Error(ErrorKind::Validation,
                  fmt::format("[{}].summary: more than {} sentences for '{}'", i,
                              kMaxSummarySentences, e.service_name));
    }
    auto [name_it, name_new] = kb.by_name_.emplace(normalize_service_name(e.service_name), i);
    if (!name_new) {
      throw Error(ErrorKind::DuplicateEntry,
                  fmt::format("duplicate service name '{}' (entries {} and {})", e.service_name,
                              name_it->second, i));
    }
    auto [code_it, code_new] = kb.by_code_.emplace(std::make_pair(e.pdu_class, e.service_code), i);
    if (!code_new) {
      throw Error(ErrorKind::DuplicateEntry,
                  fmt::format("duplicate {} service code {} ('{}' and '{}')", class_name(e.pdu_class),
                              e.service_code, entries[code_it->second].service_name,
                              e.service_name));
    }
  }
  kb.entries_ = std::move(entries);
  return kb;
}

const ServiceEntry* ServiceKB::find(ServiceClass cls, std::uint8_t code) const noexcept {
  auto it = by_code_.find({cls, code});
  return it == by_code_.end() ? nullptr : &entries_[it->second];
}

const ServiceEntry* ServiceKB::find(std::string_view name) const noexcept {
  auto it = by_name_.find(normalize_service_name(name));
  return it == by_name_.end() ? nullptr : &entries_[it->second];
}

ServiceKB parse_service_kb(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Validation, fmt::format("service KB is not valid JSON: {}", e.what()));
  }
  if (!doc.is_array()) throw Error(ErrorKind::Validation, "service KB must be a JSON array");

  std::vector<ServiceEntry> entries;
  entries.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    auto fail = [&](std::string_view field, std::string_view what) {
      throw Error(ErrorKind::Validation, fmt::format("[{}].{}: {}", i, field, what));
    };
    if (!item.is_object()) fail("", "expected object");
    ServiceEntry e;
    const auto name = item.find("service_name");
    if (name == item.end() || !name->is_string()) fail("service_name", "expected string");
    e.service_name = name->get<std::string>();
    const auto code = item.find("service_code");
    if (code == item.end() || !code->is_number_unsigned() || code->get<std::uint64_t>() > 255) {
      fail("service_code", "expected integer in [0, 255]");
    }
    e.service_code = static_cast<std::uint8_t>(code->get<std::uint64_t>());
    const auto cls = item.find("pdu_class");
    if (cls == item.end() || !cls->is_string()) fail("pdu_class", "expected string");
    if (*cls == "confirmed") {
      e.pdu_class = ServiceClass::Confirmed;
    } else if (*cls == "unconfirmed") {
      e.pdu_class = ServiceClass::Unconfirmed;
    } else {
      fail("pdu_class", "expected \"confirmed\" or \"unconfirmed\"");
    }
    const auto summary = item.find("summary");
    if (summary == item.end() || !summary->is_string()) fail("summary", "expected string");
    e.summary = summary->get<std::string>();
    entries.push_back(std::move(e));
  }
  return ServiceKB::from_entries(std::move(entries));
}

ServiceKB load_service_kb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open service KB '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_service_kb(buffer.str());
}

const ServiceEntry* lookup_service(const ServiceKB& kb, const DecodedPacket& packet) noexcept {
  if (!packet.apdu || !packet.apdu->service_choice) return nullptr;
  const auto cls = service_class_of(packet.apdu->pdu_type);
  if (!cls) return nullptr;
  const ServiceChoice& choice = *packet.apdu->service_choice;
  if (const ServiceEntry* entry = kb.find(*cls, choice.code)) return entry;
  if (!choice.name.empty()) {
    const ServiceEntry* entry = kb.find(choice.name);
    if (entry && entry->pdu_class == *cls) return entry;
  }
  return nullptr;
}

std::string service_context_text(const ServiceEntry& entry, PduType pdu_type) {
  std::string text = fmt::format("{} ({} service {}): {}", entry.service_name,
                                 class_name(entry.pdu_class), entry.service_code, entry.summary);
  if (pdu_type == PduType::Error) {
    text += fmt::format(" This packet is an Error response reporting that the {} request failed.",
                        entry.service_name);
  }
  return text;
}

}  // namespace bacsum
