#ifndef EXSEL_ERROR_HPP_
#define EXSEL_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace exsel {

enum class Errc {
  kInvalidArgument,
  kZeroColumn,
  kBadDim,
  kParseError,
  kRaggedRows,
  kIo,
  kNoConvergence,
  kTooFewPoints,
  kZeroCode,
  kEmptyGraph,
  kNoExemplarsForClass,
  kLengthMismatch,
  kEmptySelection,
  kUnsupportedDim,
  kDegenerateHull,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kZeroColumn: return "ZeroColumn";
    case Errc::kBadDim: return "BadDim";
    case Errc::kParseError: return "ParseError";
    case Errc::kRaggedRows: return "RaggedRows";
    case Errc::kIo: return "Io";
    case Errc::kNoConvergence: return "NoConvergence";
    case Errc::kTooFewPoints: return "TooFewPoints";
    case Errc::kZeroCode: return "ZeroCode";
    case Errc::kEmptyGraph: return "EmptyGraph";
    case Errc::kNoExemplarsForClass: return "NoExemplarsForClass";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kEmptySelection: return "EmptySelection";
    case Errc::kUnsupportedDim: return "UnsupportedDim";
    case Errc::kDegenerateHull: return "DegenerateHull";
  }
  return "Unknown";
}

// Every failure in the library surfaces as an Error. `index()` carries the
// offending column, line, target or class id when one exists.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        index_(index) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  Errc code_;
  std::optional<std::size_t> index_;
};

inline void require(bool condition, Errc code, const std::string& what,
                    std::optional<std::size_t> index = std::nullopt) {
  if (!condition) throw Error(code, what, index);
}

}  // namespace exsel

#endif  // EXSEL_ERROR_HPP_
