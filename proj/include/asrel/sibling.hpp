#pragma once

// s2s inference from organization registrations and a synonym dictionary.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "asrel/ingest.hpp"
#include "asrel/topology.hpp"
#include "asrel/types.hpp"

namespace asrel {

/// Case-folds, collapses internal whitespace and strips leading/trailing
/// whitespace and punctuation.
inline std::string normalize_org_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char raw : name) {
    auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  auto is_trim = [](unsigned char c) { return std::ispunct(c) || std::isspace(c); };
  std::size_t b = 0, e = out.size();
  while (b < e && is_trim(static_cast<unsigned char>(out[b]))) ++b;
  while (e > b && is_trim(static_cast<unsigned char>(out[e - 1]))) --e;
  return out.substr(b, e - b);
}

struct OrgRecords {
  std::map<Asn, std::string> owner;
};

class SynonymDict {
 public:
  SynonymDict() = default;

  /// Each class lists names of one organization; classes must be disjoint
  /// after normalization.
  explicit SynonymDict(const std::vector<std::set<std::string>>& classes) {
    for (const auto& cls : classes) {
      std::set<std::string> norm;
      for (const auto& n : cls) {
        auto k = normalize_org_name(n);
        if (!k.empty()) norm.insert(k);
      }
      if (norm.empty()) continue;
      const std::string id = *norm.begin();
      for (const auto& k : norm) {
        auto [it, fresh] = canon_.emplace(k, id);
        if (!fresh && it->second != id)
          throw std::invalid_argument("synonym classes overlap on '" + k + "'");
      }
    }
  }

  /// Canonical id of a name: the smallest normalized member of its class, or
  /// the normalized name itself when it belongs to no class.
  std::string canonical(std::string_view name) const {
    auto k = normalize_org_name(name);
    auto it = canon_.find(k);
    return it == canon_.end() ? k : it->second;
  }

 private:
  std::map<std::string, std::string> canon_;
};

inline std::string canonical_org(std::string_view name, const SynonymDict& dict) { return dict.canonical(name); }

/// Edges of the graph whose endpoints are registered to the same or to
/// synonymous organizations. Unregistered ASes never have siblings.
inline std::set<EdgeKey> infer_s2s(const AsGraph& graph, const OrgRecords& orgs, const SynonymDict& dict) {
  std::map<Asn, std::string> canon;
  for (const auto& [asn, name] : orgs.owner) canon.emplace(asn, dict.canonical(name));
  std::set<EdgeKey> s;
  for (const auto& e : graph.edges) {
    auto a = canon.find(e.lo), b = canon.find(e.hi);
    if (a != canon.end() && b != canon.end() && !a->second.empty() && a->second == b->second) s.insert(e);
  }
  return s;
}

/// Reads `ASN|OrgName` lines. Blank and `#` lines are ignored.
inline OrgRecords read_org_records(std::istream& in) {
  OrgRecords out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto bar = line.find('|');
    if (bar == std::string::npos) throw ParseError("expected ASN|OrgName", line_no);
    auto asn_tok = std::string_view(line).substr(first, bar - first);
    while (!asn_tok.empty() && (asn_tok.back() == ' ' || asn_tok.back() == '\t')) asn_tok.remove_suffix(1);
    Asn asn = detail::parse_asn(asn_tok, line_no);
    std::string name = line.substr(bar + 1);
    if (normalize_org_name(name).empty()) throw ParseError("empty organization name", line_no);
    if (!out.owner.emplace(asn, name).second)
      throw ParseError("AS " + std::to_string(asn) + " registered twice", line_no);
  }
  return out;
}

/// Reads one synonym class per line, names separated by `|`.
inline SynonymDict read_synonyms(std::istream& in) {
  std::vector<std::set<std::string>> classes;
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::set<std::string> cls;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto bar = line.find('|', pos);
      if (bar == std::string::npos) bar = line.size();
      cls.insert(line.substr(pos, bar - pos));
      pos = bar + 1;
    }
    classes.push_back(std::move(cls));
  }
  return SynonymDict(classes);
}

inline void write_org_records(std::ostream& out, const OrgRecords& orgs) {
  for (const auto& [asn, name] : orgs.owner) out << asn << '|' << name << '\n';
}

inline void write_synonyms(std::ostream& out, const std::vector<std::set<std::string>>& classes) {
  for (const auto& cls : classes) {
    bool first = true;
    for (const auto& name : cls) {
      out << (first ? "" : "|") << name;
      first = false;
    }
    out << '\n';
  }
}

inline OrgRecords load_org_records(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open org file " + file.string());
  return read_org_records(in);
}

inline SynonymDict load_synonyms(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open synonym file " + file.string());
  return read_synonyms(in);
}

}  // namespace asrel
