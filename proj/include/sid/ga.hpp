#ifndef SID_GA_HPP
#define SID_GA_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "sid/matrix.hpp"

namespace sid::ga {

struct GaConfig {
  int population_size = 50;
  int generations = 25;
  double crossover_rate = 0.8;
  double mutation_rate = 0.05;  // per gene, uniform redraw within bounds
  int elitism_count = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneSpec {
  double min = 0.0;
  double max = 1.0;
  bool integer = false;
};

using Chromosome = std::vector<double>;
using FitnessFn = std::function<double(const Chromosome&)>;

struct GaResult {
  Chromosome best;
  double best_fitness = 0.0;
  std::vector<double> per_generation_best;  // non-decreasing under elitism
};

// Tournament selection (size 3), blend crossover for real genes / uniform
// gene swap for integer genes, bounded uniform-redraw mutation, elitism.
// Deterministic for a given seed; every evaluated chromosome respects the
// gene bounds.
GaResult run_ga(const FitnessFn& fitness, const std::vector<GeneSpec>& genes,
                const GaConfig& config);

// Decision-gap fitness for threshold search: genuine-acceptance minus
// impostor-acceptance at tau, in percent.
double threshold_fitness(double tau, const std::vector<double>& genuine_lrs,
                         const std::vector<double>& impostor_lrs);

// GA-tuned threshold over [min, max] of the pooled populations.
struct ThresholdResult {
  double tau = 0.0;
  double fitness = 0.0;
  std::vector<double> per_generation_best;
};
ThresholdResult tune_threshold(const std::vector<double>& genuine_lrs,
                               const std::vector<double>& impostor_lrs,
                               const GaConfig& config);

// Per-speaker feature sequences with a held-out validation part, for one
// band's architecture search.
struct BandData {
  std::vector<std::vector<Matrix>> train;       // per speaker
  std::vector<std::vector<Matrix>> validation;  // per speaker, non-empty
};

// Trains one HMM per speaker with the candidate (states, mixtures) and
// returns the validation identification rate in [0, 100]. Any training
// failure yields 0 rather than an exception.
double architecture_fitness(int states, int mixtures, const BandData& data);

void write_convergence_csv(const std::string& path,
                           const std::vector<double>& per_generation_best);

}  // namespace sid::ga

#endif  // SID_GA_HPP
