#include "aflow/syntax.hpp"

namespace aflow {

namespace {

const char* kStyleNames[] = {"declarative", "dataflow", "pseudo-natural"};
const char* kExtensions[] = {".adl", ".adf", ".apn"};

}  // namespace

std::string_view to_string(SyntaxStyle s) { return kStyleNames[static_cast<int>(s)]; }

std::optional<SyntaxStyle> style_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(SyntaxStyle::pseudo_natural); ++i) {
    if (s == kStyleNames[i]) return static_cast<SyntaxStyle>(i);
  }
  if (s == "pseudo_natural" || s == "pseudo") return SyntaxStyle::pseudo_natural;
  return std::nullopt;
}

std::string_view file_extension(SyntaxStyle s) { return kExtensions[static_cast<int>(s)]; }

std::optional<SyntaxStyle> style_from_extension(std::string_view path) {
  for (int i = 0; i <= static_cast<int>(SyntaxStyle::pseudo_natural); ++i) {
    std::string_view ext = kExtensions[i];
    if (path.size() >= ext.size() && path.substr(path.size() - ext.size()) == ext) {
      return static_cast<SyntaxStyle>(i);
    }
  }
  return std::nullopt;
}

}  // namespace aflow
