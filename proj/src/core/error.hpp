#pragma once

#include <stdexcept>
#include <string>

namespace cocylab {

enum class Errc {
  invalid_matrix,
  rank_error,
  zero_matrix,
  domain_error,
  spec_error,
  primitivity_error,
  block_cap_exceeded,
  budget_exceeded,
  degenerate_variance,
  parse_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_matrix: return "InvalidMatrix";
    case Errc::rank_error: return "RankError";
    case Errc::zero_matrix: return "ZeroMatrixError";
    case Errc::domain_error: return "DomainError";
    case Errc::spec_error: return "SpecError";
    case Errc::primitivity_error: return "PrimitivityError";
    case Errc::block_cap_exceeded: return "BlockCapExceeded";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::parse_error: return "ParseError";
  }
  return "Error";
}

}  // namespace cocylab
