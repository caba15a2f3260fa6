#pragma once

#include <functional>
#include <string>

#include "dsa/errors.hpp"
#include "dsa/problem.hpp"

namespace testing_support {

// Scalar problem with scripted moves: energy(x) = x, neighbor(x) = move(x).
class ScriptedProblem final : public dsa::Problem {
 public:
  ScriptedProblem(double start, std::function<double(double)> move)
      : start_(start), move_(std::move(move)) {}

  dsa::ProblemKind kind() const override { return dsa::ProblemKind::kSkewed1d; }
  dsa::Solution random_solution(dsa::RngStream&) const override { return start_; }
  dsa::Solution neighbor(const dsa::Solution& s, dsa::RngStream&, double) const override {
    return move_(std::get<double>(s));
  }
  double energy(const dsa::Solution& s) const override {
    const double x = std::get<double>(s);
    if (x != x) throw dsa::ValidationError("infeasible");
    return x;
  }
  void validate(const dsa::Solution& s) const override { energy(s); }
  std::string canonical_key(const dsa::Solution& s) const override {
    return std::to_string(std::get<double>(s));
  }

 private:
  double start_;
  std::function<double(double)> move_;
};

}  // namespace testing_support
