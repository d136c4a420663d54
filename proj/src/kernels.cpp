// Copyright 2026 The uqrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "uqrl/kernels.hpp"

#include <cstddef>
#include <exception>
#include <string>

#include "uqrl/aggregation.hpp"
#include "uqrl/errors.hpp"

namespace uqrl::kernels {
namespace {

void check_sizes(std::size_t in, std::size_t out) {
  if (in != out)
    throw InvalidInput("kernel output span has " + std::to_string(out) +
                       " slots for " + std::to_string(in) + " inputs");
}

// Exceptions must not escape an OpenMP region; capture the first one and
// rethrow after the loop.
template <typename Body>
void parallel_for(std::ptrdiff_t n, Body body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(uqrl_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void score_tokens(std::span<const TokenDistribution> dists,
                  const UncertaintyWeights& w, std::span<double> out) {
  check_sizes(dists.size(), out.size());
  parallel_for(static_cast<std::ptrdiff_t>(dists.size()), [&](std::ptrdiff_t i) {
    out[i] = aggregate_token_uncertainty(dists[i], w);
  });
}

void score_tokens_serial(std::span<const TokenDistribution> dists,
                         const UncertaintyWeights& w, std::span<double> out) {
  check_sizes(dists.size(), out.size());
  for (std::size_t i = 0; i < dists.size(); ++i)
    out[i] = aggregate_token_uncertainty(dists[i], w);
}

void entropies(std::span<const TokenDistribution> dists, std::span<double> out) {
  check_sizes(dists.size(), out.size());
  parallel_for(static_cast<std::ptrdiff_t>(dists.size()), [&](std::ptrdiff_t i) {
    out[i] = entropy_uncertainty(dists[i]);
  });
}

void entropies_serial(std::span<const TokenDistribution> dists,
                      std::span<double> out) {
  check_sizes(dists.size(), out.size());
  for (std::size_t i = 0; i < dists.size(); ++i)
    out[i] = entropy_uncertainty(dists[i]);
}

void trajectory_uncertainties(std::span<const std::vector<double>> sequences,
                              double lambda, std::span<double> out) {
  check_sizes(sequences.size(), out.size());
  parallel_for(static_cast<std::ptrdiff_t>(sequences.size()),
               [&](std::ptrdiff_t i) {
                 out[i] = trajectory_uncertainty(sequences[i], lambda);
               });
}

void trajectory_uncertainties_serial(
    std::span<const std::vector<double>> sequences, double lambda,
    std::span<double> out) {
  check_sizes(sequences.size(), out.size());
  for (std::size_t i = 0; i < sequences.size(); ++i)
    out[i] = trajectory_uncertainty(sequences[i], lambda);
}

double mean_entropy(std::span<const TokenDistribution> dists, Execution exec) {
  if (dists.empty()) return 0.0;
  std::vector<double> buf(dists.size());
  if (exec == Execution::kParallel)
    entropies(dists, buf);
  else
    entropies_serial(dists, buf);
  double sum = 0.0;
  for (double h : buf) sum += h;
  return sum / static_cast<double>(buf.size());
}

}  // namespace uqrl::kernels
