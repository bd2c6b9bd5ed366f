#include "jcedkit/symbolic_model.hpp"

#include "jcedkit/error.hpp"

namespace jced {

const char* to_string(ChanceKind k) {
  switch (k) {
    case ChanceKind::Freq: return "freq";
    case ChanceKind::DibrUp: return "dibr_up";
    case ChanceKind::LineFlow: return "line_flow";
  }
  return "?";
}

const char* to_string(ModeKind m) {
  switch (m) {
    case ModeKind::PoJced: return "po-jced";
    case ModeKind::FixJced: return "fix-jced";
    case ModeKind::UpIced: return "up-iced";
  }
  return "?";
}

ModeKind parse_mode(const std::string& s) {
  if (s == "po-jced" || s == "po") return ModeKind::PoJced;
  if (s == "fix-jced" || s == "fix") return ModeKind::FixJced;
  if (s == "up-iced" || s == "up") return ModeKind::UpIced;
  throw ValidationError("unknown mode '" + s + "' (expected po-jced, fix-jced or up-iced)");
}

}  // namespace jced
