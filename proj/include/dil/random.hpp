#pragma once

// Seeded generators of random operators and ansatz functions for property
// checks.

#include <random>

#include "dil/opcalc.hpp"

namespace dil {

inline ComplexRational random_coefficient(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-5, 5);
  std::uniform_int_distribution<int> den(1, 4);
  ComplexRational c;
  do {
    c = ComplexRational(Rational(num(rng), den(rng)), Rational(num(rng), den(rng)));
  } while (c.is_zero());
  return c;
}

// Each of the four powers is at most max_degree.
inline OperatorExpression random_expression(std::mt19937_64& rng, unsigned max_degree = 3, int max_terms = 4) {
  std::uniform_int_distribution<int> count(0, max_terms);
  std::uniform_int_distribution<unsigned> power(0, max_degree);
  std::vector<OperatorTerm> terms;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) terms.push_back({random_coefficient(rng), power(rng), power(rng), power(rng), power(rng)});
  return OperatorExpression::from_terms(terms);
}

inline BlockOperator random_block(std::mt19937_64& rng, std::size_t rows, std::size_t cols, unsigned max_degree = 3,
                                  int max_terms = 3) {
  BlockOperator b(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) b.at(i, j) = random_expression(rng, max_degree, max_terms);
  }
  return b;
}

inline GaussianAnsatz random_ansatz(std::mt19937_64& rng, const Rational& alpha, unsigned max_degree = 2,
                                    int max_terms = 3) {
  std::uniform_int_distribution<unsigned> power(0, max_degree);
  std::uniform_int_distribution<int> count(1, max_terms);
  Polynomial p;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) p.add(power(rng), power(rng), random_coefficient(rng));
  return {alpha, std::move(p)};
}

}  // namespace dil
