#pragma once

// Shared vocabulary: index types, the error type, enumeration budgets and a
// small depth-first search helper used by every brute-force oracle.

#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tck {

using Obj = std::int32_t;
using Arr = std::int32_t;
inline constexpr std::int32_t none = -1;

enum class ErrorKind {
  MissingIdentity,
  NonAssociative,
  IllTypedComposite,
  MissingComposite,
  UnknownObject,
  UnknownArrow,
  DanglingReference,
  InvariantViolation,
  SizeBound,
  NotOpfibration,
  NotOpfibrationAt,
  MixedCodomain,
  AxiomViolation,
  NotSubcanonical,
  CocycleViolation,
  FactorizationFailed,
  NoIsoFound,
  NotInjective,
  NotSurjective,
  SyntaxError,
  UnknownCommand,
  MissingSection,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::MissingIdentity: return "MissingIdentity";
    case ErrorKind::NonAssociative: return "NonAssociative";
    case ErrorKind::IllTypedComposite: return "IllTypedComposite";
    case ErrorKind::MissingComposite: return "MissingComposite";
    case ErrorKind::UnknownObject: return "UnknownObject";
    case ErrorKind::UnknownArrow: return "UnknownArrow";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::SizeBound: return "SizeBound";
    case ErrorKind::NotOpfibration: return "NotOpfibration";
    case ErrorKind::NotOpfibrationAt: return "NotOpfibrationAt";
    case ErrorKind::MixedCodomain: return "MixedCodomain";
    case ErrorKind::AxiomViolation: return "AxiomViolation";
    case ErrorKind::NotSubcanonical: return "NotSubcanonical";
    case ErrorKind::CocycleViolation: return "CocycleViolation";
    case ErrorKind::FactorizationFailed: return "FactorizationFailed";
    case ErrorKind::NoIsoFound: return "NoIsoFound";
    case ErrorKind::NotInjective: return "NotInjective";
    case ErrorKind::NotSurjective: return "NotSurjective";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownCommand: return "UnknownCommand";
    case ErrorKind::MissingSection: return "MissingSection";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

template <typename... Parts>
std::string cat(Parts&&... parts) {
  std::ostringstream out;
  (out << ... << std::forward<Parts>(parts));
  return out.str();
}

template <typename... Parts>
[[noreturn]] void fail(ErrorKind kind, Parts&&... parts) {
  throw Error(kind, cat(std::forward<Parts>(parts)...));
}

inline constexpr std::uint64_t default_bound = 1'000'000;

// Caps the number of candidates an oracle may inspect. Exceeding the limit
// raises SizeBound instead of running unbounded.
class Budget {
 public:
  explicit Budget(std::uint64_t limit = default_bound) : limit_(limit) {}

  void spend(std::uint64_t n = 1) {
    used_ += n;
    if (used_ > limit_) fail(ErrorKind::SizeBound, "enumeration exceeded bound of ", limit_, " candidates");
  }

  std::uint64_t limit() const noexcept { return limit_; }
  std::uint64_t used() const noexcept { return used_; }

 private:
  std::uint64_t limit_;
  std::uint64_t used_ = 0;
};

// Depth-first search over slot assignments. `candidates(i, partial)` lists the
// values for slot i given slots [0, i); `consistent(i, partial)` prunes after
// slot i is filled; `emit(full)` returns false to stop the search.
template <typename T, typename Candidates, typename Consistent, typename Emit>
void depth_first(std::size_t slots, Candidates&& candidates, Consistent&& consistent, Emit&& emit,
                 Budget& budget) {
  std::vector<T> partial;
  partial.reserve(slots);
  bool stop = false;
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (stop) return;
    if (i == slots) {
      if (!emit(static_cast<const std::vector<T>&>(partial))) stop = true;
      return;
    }
    const std::vector<T> options = candidates(i, static_cast<const std::vector<T>&>(partial));
    for (const T& v : options) {
      budget.spend();
      partial.push_back(v);
      if (consistent(i, static_cast<const std::vector<T>&>(partial))) go(i + 1);
      partial.pop_back();
      if (stop) return;
    }
  };
  go(0);
}

template <typename T>
bool shared_equal(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

}  // namespace tck
