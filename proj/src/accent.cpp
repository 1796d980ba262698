#include "accentasr/accent.hpp"

#include <fstream>
#include <set>

namespace accentasr {

void validate_accent_inventory(const std::vector<AccentId>& accents) {
  std::set<std::string> seen;
  for (const auto& a : accents) {
    if (!valid_accent_code(a.code))
      throw ValidationError("invalid accent code \"" + a.code + "\"");
    if (!seen.insert(a.code).second)
      throw ValidationError("duplicate accent code \"" + a.code + "\"");
  }
}

std::vector<AccentId> read_accent_inventory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open accent inventory file: " + path);
  std::vector<AccentId> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected CODE<TAB>Display Name");
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  validate_accent_inventory(out);
  return out;
}

void write_accent_inventory(const std::vector<AccentId>& accents, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write accent inventory file: " + path);
  for (const auto& a : accents) out << a.code << '\t' << a.display_name << '\n';
}

std::vector<AccentId> default_accent_inventory() {
  return {
      {"US", "American"},   {"UK", "British"},  {"CHN", "Chinese"},
      {"IND", "Indian"},    {"JAP", "Japanese"}, {"KOR", "Korean"},
      {"POR", "Portuguese"}, {"RUS", "Russian"},
  };
}

std::string TaggedGrapheme::str() const {
  std::string s(1, base);
  if (!accent.empty()) {
    s += '_';
    s += accent;
  }
  if (word_boundary) s += "_WB";
  return s;
}

TaggedGrapheme TaggedGrapheme::parse(const std::string& s) {
  auto parts = split(s, '_');
  if (parts.empty() || parts[0].size() != 1)
    throw ParseError("malformed grapheme \"" + s + "\": base must be a single character");
  TaggedGrapheme g;
  g.base = parts[0][0];
  size_t i = 1;
  if (i < parts.size() && parts[i] != "WB") {
    if (!valid_accent_code(parts[i]))
      throw ParseError("malformed grapheme \"" + s + "\": bad accent component \"" + parts[i] + "\"");
    g.accent = parts[i];
    ++i;
  }
  if (i < parts.size() && parts[i] == "WB") {
    g.word_boundary = true;
    ++i;
  }
  if (i != parts.size())
    throw ParseError("malformed grapheme \"" + s + "\": trailing components after " +
                     (g.word_boundary ? "\"_WB\"" : "accent"));
  return g;
}

}  // namespace accentasr
