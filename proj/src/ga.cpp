#include "sid/ga.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sid/decision.hpp"
#include "sid/errors.hpp"
#include "sid/hmm.hpp"
#include "sid/rng.hpp"

namespace sid::ga {

void GaConfig::validate() const {
  if (population_size < 2) throw ConfigError("population must be >= 2");
  if (generations < 1) throw ConfigError("generations must be >= 1");
  if (crossover_rate < 0.0 || crossover_rate > 1.0 ||
      mutation_rate < 0.0 || mutation_rate > 1.0)
    throw ConfigError("rates must be in [0, 1]");
  if (elitism_count < 0 || elitism_count >= population_size)
    throw ConfigError("elitism must be in [0, population)");
}

namespace {

double random_gene(const GeneSpec& g, Rng& rng) {
  if (g.integer)
    return static_cast<double>(rng.uniform_int(
        static_cast<std::int64_t>(g.min), static_cast<std::int64_t>(g.max)));
  return rng.uniform(g.min, g.max);
}

double clamp_gene(const GeneSpec& g, double v) {
  if (g.integer) v = std::round(v);
  return std::clamp(v, g.min, g.max);
}

}  // namespace

GaResult run_ga(const FitnessFn& fitness, const std::vector<GeneSpec>& genes,
                const GaConfig& config) {
  config.validate();
  if (genes.empty()) throw ConfigError("no genes");
  for (const GeneSpec& g : genes)
    if (!(g.min <= g.max)) throw ConfigError("gene bounds inverted");

  const int pop_n = config.population_size;
  const int n_genes = static_cast<int>(genes.size());
  Rng root(config.seed);

  std::vector<Chromosome> pop(pop_n, Chromosome(n_genes));
  {
    Rng init = root.fork(0);
    for (int i = 0; i < pop_n; ++i) {
      Rng r = init.fork(i);
      for (int g = 0; g < n_genes; ++g) pop[i][g] = random_gene(genes[g], r);
    }
  }

  std::vector<double> fit(pop_n);
  for (int i = 0; i < pop_n; ++i) fit[i] = fitness(pop[i]);

  GaResult result;
  result.per_generation_best.reserve(config.generations);

  std::vector<int> rank(pop_n);
  for (int gen = 0; gen < config.generations; ++gen) {
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](int a, int b) { return fit[a] > fit[b]; });

    result.per_generation_best.push_back(fit[rank[0]]);
    if (gen == 0 || fit[rank[0]] > result.best_fitness || result.best.empty()) {
      result.best = pop[rank[0]];
      result.best_fitness = fit[rank[0]];
    }

    Rng gen_rng = root.fork(1 + gen);
    std::vector<Chromosome> next;
    next.reserve(pop_n);
    for (int e = 0; e < config.elitism_count; ++e) next.push_back(pop[rank[e]]);

    auto tournament = [&](Rng& r) -> int {
      int best = static_cast<int>(r.uniform_int(0, pop_n - 1));
      for (int t = 1; t < 3; ++t) {
        const int c = static_cast<int>(r.uniform_int(0, pop_n - 1));
        if (fit[c] > fit[best]) best = c;
      }
      return best;
    };

    while (static_cast<int>(next.size()) < pop_n) {
      Rng r = gen_rng.fork(next.size());
      const Chromosome& pa = pop[tournament(r)];
      const Chromosome& pb = pop[tournament(r)];
      Chromosome child = pa;
      if (r.uniform() < config.crossover_rate) {
        for (int g = 0; g < n_genes; ++g) {
          if (genes[g].integer) {
            child[g] = r.uniform() < 0.5 ? pa[g] : pb[g];
          } else {
            // blend with 0.5 extrapolation so children can probe past
            // their parents
            const double u = r.uniform(-0.5, 1.5);
            child[g] = clamp_gene(genes[g], pa[g] + u * (pb[g] - pa[g]));
          }
        }
      }
      for (int g = 0; g < n_genes; ++g)
        if (r.uniform() < config.mutation_rate)
          child[g] = random_gene(genes[g], r);
      next.push_back(std::move(child));
    }

    pop = std::move(next);
    for (int i = 0; i < pop_n; ++i) fit[i] = fitness(pop[i]);
  }

  // final population may contain the overall best
  for (int i = 0; i < pop_n; ++i) {
    if (fit[i] > result.best_fitness) {
      result.best_fitness = fit[i];
      result.best = pop[i];
    }
  }
  if (!result.per_generation_best.empty())
    result.per_generation_best.back() =
        std::max(result.per_generation_best.back(), result.best_fitness);
  return result;
}

double threshold_fitness(double tau, const std::vector<double>& genuine_lrs,
                         const std::vector<double>& impostor_lrs) {
  return decision::decision_gap(tau, genuine_lrs, impostor_lrs);
}

ThresholdResult tune_threshold(const std::vector<double>& genuine_lrs,
                               const std::vector<double>& impostor_lrs,
                               const GaConfig& config) {
  if (genuine_lrs.empty() || impostor_lrs.empty())
    throw MetricError("empty score population");
  double lo = genuine_lrs[0], hi = genuine_lrs[0];
  for (double v : genuine_lrs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : impostor_lrs) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;

  const GaResult r = run_ga(
      [&](const Chromosome& c) {
        return threshold_fitness(c[0], genuine_lrs, impostor_lrs);
      },
      {{lo, hi, false}}, config);

  ThresholdResult out;
  out.tau = r.best[0];
  out.fitness = r.best_fitness;
  out.per_generation_best = r.per_generation_best;

  // The fitness is piecewise constant between observed scores, so any point
  // of the winning plateau is an equally fit threshold. Center it between
  // its neighboring scores for maximum margin on both sides.
  {
    double below = out.tau, above = out.tau;
    bool has_below = false, has_above = false;
    auto consider = [&](double v) {
      if (v < out.tau && (!has_below || v > below)) {
        below = v;
        has_below = true;
      }
      if (v > out.tau && (!has_above || v < above)) {
        above = v;
        has_above = true;
      }
    };
    for (double v : genuine_lrs) consider(v);
    for (double v : impostor_lrs) consider(v);
    if (has_below && has_above) {
      const double mid = 0.5 * (below + above);
      if (threshold_fitness(mid, genuine_lrs, impostor_lrs) >= out.fitness)
        out.tau = mid;
    }
  }
  return out;
}

double architecture_fitness(int states, int mixtures, const BandData& data) {
  if (states < 1 || mixtures < 1) return 0.0;
  const std::size_t n_speakers = data.train.size();
  if (n_speakers < 2 || data.validation.size() != n_speakers) return 0.0;

  try {
    std::vector<hmm::HmmModel> models;
    models.reserve(n_speakers);
    hmm::TrainConfig cfg;
    cfg.max_iters = 10;
    for (std::size_t s = 0; s < n_speakers; ++s) {
      hmm::HmmModel init = hmm::init_model(states, mixtures, CovType::Diagonal,
                                           data.train[s]);
      models.push_back(hmm::train_baum_welch(init, data.train[s], cfg).first);
    }

    std::size_t correct = 0, total = 0;
    for (std::size_t s = 0; s < n_speakers; ++s) {
      for (const Matrix& seq : data.validation[s]) {
        std::size_t best = 0;
        double best_ll = kNegInf;
        for (std::size_t m = 0; m < n_speakers; ++m) {
          const double ll = hmm::log_likelihood(models[m], seq);
          if (ll > best_ll) {
            best_ll = ll;
            best = m;
          }
        }
        if (best == s) ++correct;
        ++total;
      }
    }
    if (total == 0) return 0.0;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
  } catch (const Error&) {
    return 0.0;  // degenerate architectures are penalized, not fatal
  }
}

void write_convergence_csv(const std::string& path,
                           const std::vector<double>& per_generation_best) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << "generation,best_fitness\n";
  f.precision(17);
  for (std::size_t g = 0; g < per_generation_best.size(); ++g)
    f << g << ',' << per_generation_best[g] << '\n';
}

}  // namespace sid::ga
