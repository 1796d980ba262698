#pragma once

#include <optional>
#include <string>
#include <vector>

#include "accentasr/common.hpp"

namespace accentasr {

// Accent identifier, e.g. {"BRT", "British"}. The code is what gets
// suffixed to words and graphemes ("hello_BRT", "h_BRT_WB").
struct AccentId {
  std::string code;
  std::string display_name;

  bool operator==(const AccentId& o) const { return code == o.code; }
};

// Codes must be usable as "_<code>" suffixes: non-empty, no '_', and not
// the reserved word-boundary marker.
inline bool valid_accent_code(const std::string& code) {
  if (code.empty() || code == "WB") return false;
  return code.find('_') == std::string::npos;
}

void validate_accent_inventory(const std::vector<AccentId>& accents);

std::vector<AccentId> read_accent_inventory(const std::string& path);
void write_accent_inventory(const std::vector<AccentId>& accents, const std::string& path);

std::vector<AccentId> default_accent_inventory();

// One position-dependent, optionally accent-qualified grapheme unit.
// Canonical string form: base, then "_<accent>", then "_WB", in that order.
struct TaggedGrapheme {
  char base = 0;
  std::string accent;  // empty = untagged
  bool word_boundary = false;

  std::string str() const;
  static TaggedGrapheme parse(const std::string& s);

  bool operator==(const TaggedGrapheme& o) const = default;
};

inline const std::string kSilenceUnit = "sil";

}  // namespace accentasr
