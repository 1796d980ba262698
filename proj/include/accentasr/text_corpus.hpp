#pragma once

#include <string>
#include <vector>

#include "accentasr/accent.hpp"

namespace accentasr {

// One transcript with its single accent; the LM trainers and the
// evaluation suite both consume this view.
struct TextUtterance {
  std::string id;
  std::vector<std::string> words;
  std::string accent_code;
};

using TextCorpus = std::vector<TextUtterance>;

}  // namespace accentasr
