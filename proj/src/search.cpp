#include "qmetro/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "qmetro/parallel.hpp"

namespace qmetro {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0) y += kTwoPi;
  return y;
}

}  // namespace

RealVector pso_velocity_update(const RealVector& v, const RealVector& x,
                               const RealVector& y, const RealVector& y_global,
                               const PsoConfig& cfg) {
  return cfg.omega * v + cfg.c1 * (y - x) + cfg.c2 * (y_global - x);
}

OptResult pso_minimize(const std::function<double(const RealVector&)>& objective,
                       const SearchSpace& space, const PsoConfig& cfg,
                       std::uint64_t seed, int workers,
                       const std::vector<RealVector>& seeds_x) {
  const int dim = space.continuous_dims;
  if (dim < 1) throw std::invalid_argument("pso needs a continuous space");
  if (space.discrete_bits != 0)
    throw std::invalid_argument("pso handles continuous spaces only");
  const int np = cfg.n_particles;

  std::vector<RealVector> x(np, RealVector::Zero(dim)), v(np, RealVector::Zero(dim));
  std::vector<RealVector> best_x(np);
  std::vector<double> best_f(np, std::numeric_limits<double>::infinity());

  for (int i = 0; i < np; ++i) {
    std::mt19937_64 gen(mix_seed(seed, 0x50534fULL, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int j = 0; j < dim; ++j) {
      const auto [lo, hi] = space.bounds.at(j);
      x[i][j] = lo + (hi - lo) * u01(gen);
      v[i][j] = (hi - lo) * (u01(gen) - 0.5) * 0.5;
    }
    if (i < static_cast<int>(seeds_x.size()) && seeds_x[i].size() == dim)
      x[i] = seeds_x[i];
  }

  OptResult res;
  RealVector gbest_x = x[0];
  double gbest = std::numeric_limits<double>::infinity();
  int since_improvement = 0;

  std::vector<double> f(np);
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    parallel_for(np, workers, [&](int i) { f[i] = objective(x[i]); });

    bool improved = false;
    for (int i = 0; i < np; ++i) {
      if (f[i] < best_f[i]) {
        best_f[i] = f[i];
        best_x[i] = x[i];
      }
      if (f[i] < gbest) {
        gbest = f[i];
        gbest_x = x[i];
        improved = true;
      }
    }
    res.trace.push_back(gbest);
    since_improvement = improved ? 0 : since_improvement + 1;
    if (since_improvement >= cfg.stagnation_window) {
      ++it;
      break;
    }

    for (int i = 0; i < np; ++i) {
      v[i] = pso_velocity_update(v[i], x[i], best_x[i], gbest_x, cfg);
      x[i] += v[i];
    }
  }
  res.x = gbest_x;
  res.value = gbest;
  res.iterations = it;
  return res;
}

OptResult de_minimize(const std::function<double(const Candidate&)>& objective,
                      const SearchSpace& space, const DeConfig& cfg,
                      std::uint64_t seed, int workers,
                      const std::vector<Candidate>& seeds) {
  const int nc = space.continuous_dims;
  const int nb = space.discrete_bits;
  if (cfg.np < 4) throw std::invalid_argument("de needs Np >= 4 for three donors");

  std::vector<Candidate> pop(cfg.np);
  for (int i = 0; i < cfg.np; ++i) {
    std::mt19937_64 gen(mix_seed(seed, 0x4445ULL, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    pop[i].x.resize(nc);
    for (int j = 0; j < nc; ++j) {
      const auto [lo, hi] =
          j < static_cast<int>(space.bounds.size()) ? space.bounds[j]
                                                    : std::pair<double, double>{0.0, kTwoPi};
      pop[i].x[j] = lo + (hi - lo) * u01(gen);
    }
    pop[i].bits.resize(nb);
    for (int j = 0; j < nb; ++j) pop[i].bits[j] = u01(gen) < 0.5 ? 0 : 1;
    if (i < static_cast<int>(seeds.size())) pop[i] = seeds[i];
  }

  std::vector<double> fit(cfg.np);
  parallel_for(cfg.np, workers, [&](int i) { fit[i] = objective(pop[i]); });

  OptResult res;
  auto record_best = [&] {
    int bi = static_cast<int>(std::min_element(fit.begin(), fit.end()) - fit.begin());
    res.trace.push_back(fit[bi]);
    return bi;
  };
  record_best();

  std::vector<Candidate> offspring(cfg.np);
  std::vector<double> off_fit(cfg.np);
  for (int t = 1; t <= cfg.t_iters; ++t) {
    // offspring built from the generation-t snapshot so parallel == serial
    for (int i = 0; i < cfg.np; ++i) {
      std::mt19937_64 gen(mix_seed(seed, 0x444547ULL, static_cast<std::uint64_t>(t),
                                   static_cast<std::uint64_t>(i)));
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      std::uniform_int_distribution<int> pick(0, cfg.np - 1);
      int r1 = i, r2 = i, r3 = i;
      while (r1 == i) r1 = pick(gen);
      while (r2 == i || r2 == r1) r2 = pick(gen);
      while (r3 == i || r3 == r1 || r3 == r2) r3 = pick(gen);

      Candidate d = pop[i];
      for (int j = 0; j < nc; ++j)
        if (u01(gen) <= cfg.cr)
          d.x[j] = wrap_angle(pop[r1].x[j] + cfg.f_scale * (pop[r2].x[j] - pop[r3].x[j]));
      for (int j = 0; j < nb; ++j)
        if (u01(gen) <= cfg.cr) {
          const int raw = pop[r1].bits[j] + (pop[r2].bits[j] - pop[r3].bits[j]);
          d.bits[j] = static_cast<std::uint8_t>(((raw % 2) + 2) % 2);
        }
      offspring[i] = std::move(d);
    }
    parallel_for(cfg.np, workers, [&](int i) { off_fit[i] = objective(offspring[i]); });
    for (int i = 0; i < cfg.np; ++i) {
      if (off_fit[i] < fit[i]) {
        pop[i] = offspring[i];
        fit[i] = off_fit[i];
      }
    }
    record_best();
  }

  const int bi = static_cast<int>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  res.x = pop[bi].x;
  res.bits = pop[bi].bits;
  res.value = fit[bi];
  res.iterations = cfg.t_iters;
  return res;
}

std::pair<RealVector, double> inner_gradient_descent(
    const std::function<double(const RealVector&)>& objective, RealVector x0,
    const InnerGdConfig& cfg) {
  const int n = static_cast<int>(x0.size());
  double f0 = objective(x0);
  if (n == 0) return {std::move(x0), f0};
  for (int step = 0; step < cfg.max_steps; ++step) {
    RealVector g(n);
    for (int j = 0; j < n; ++j) {
      RealVector xp = x0, xm = x0;
      xp[j] += cfg.fd_step;
      xm[j] -= cfg.fd_step;
      g[j] = (objective(xp) - objective(xm)) / (2.0 * cfg.fd_step);
    }
    const double gn = g.norm();
    if (gn < 1e-10) break;
    double t = cfg.step;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      RealVector xn = x0 - t * g;
      const double fn = objective(xn);
      if (fn < f0 - 1e-4 * t * gn * gn) {
        x0 = std::move(xn);
        f0 = fn;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return {std::move(x0), f0};
}

OptResult genetic_gradient_minimize(
    const std::function<double(const std::vector<std::uint8_t>&, const RealVector&)>&
        objective,
    int n_bits, int n_angles, const GaConfig& cfg, std::uint64_t seed,
    int workers) {
  struct Member {
    std::vector<std::uint8_t> bits;
    RealVector angles;
    double value = std::numeric_limits<double>::infinity();
  };
  const int np = cfg.pop_size;

  auto evaluate = [&](Member& m) {
    auto inner = [&](const RealVector& a) { return objective(m.bits, a); };
    auto [a_opt, f] = inner_gradient_descent(inner, m.angles, cfg.inner_gd);
    m.angles = std::move(a_opt);
    m.value = f;
  };

  std::vector<Member> pop(np);
  for (int i = 0; i < np; ++i) {
    std::mt19937_64 gen(mix_seed(seed, 0x4741ULL, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    pop[i].bits.resize(n_bits);
    for (auto& b : pop[i].bits) b = u01(gen) < 0.5 ? 0 : 1;
    pop[i].angles.resize(n_angles);
    for (int j = 0; j < n_angles; ++j) pop[i].angles[j] = kTwoPi * u01(gen);
  }
  parallel_for(np, workers, [&](int i) { evaluate(pop[i]); });

  OptResult res;
  auto by_value = [](const Member& a, const Member& b) { return a.value < b.value; };
  std::sort(pop.begin(), pop.end(), by_value);
  res.trace.push_back(pop.front().value);

  for (int g = 1; g <= cfg.generations; ++g) {
    std::mt19937_64 gen(mix_seed(seed, 0x47475eULL, static_cast<std::uint64_t>(g)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // fitness-proportional selection on (worst - value) shifted to positive
    const double worst = pop.back().value;
    std::vector<double> fitness(np);
    double total = 0.0;
    for (int i = 0; i < np; ++i) {
      fitness[i] = (worst - pop[i].value) + 1e-12 + (worst - pop.front().value) / np;
      total += fitness[i];
    }
    auto select = [&]() -> const Member& {
      double ticket = u01(gen) * total;
      for (int i = 0; i < np; ++i) {
        ticket -= fitness[i];
        if (ticket <= 0) return pop[i];
      }
      return pop.back();
    };

    std::vector<Member> children(np);
    for (int c = 0; c < np; ++c) {
      const Member& pa = select();
      const Member& pb = select();
      Member child;
      child.bits = pa.bits;
      child.angles = pa.angles;
      if (n_bits > 0 && u01(gen) < cfg.crossover_rate) {
        std::uniform_int_distribution<int> cut(1, std::max(1, n_bits - 1));
        const int point = cut(gen);
        for (int j = point; j < n_bits; ++j) child.bits[j] = pb.bits[j];
        if (n_angles > 0) {
          std::uniform_int_distribution<int> acut(1, std::max(1, n_angles - 1));
          const int apoint = acut(gen);
          for (int j = apoint; j < n_angles; ++j) child.angles[j] = pb.angles[j];
        }
      }
      for (int j = 0; j < n_bits; ++j)
        if (u01(gen) < cfg.mutation_rate) child.bits[j] ^= 1;
      children[c] = std::move(child);
    }
    parallel_for(np, workers, [&](int i) { evaluate(children[i]); });

    // elitist replacement: best of parents and children, elites guaranteed
    std::vector<Member> merged;
    merged.reserve(2 * np);
    for (int i = 0; i < std::min(cfg.elitism_count, np); ++i) merged.push_back(pop[i]);
    for (auto& c : children) merged.push_back(std::move(c));
    for (int i = std::min(cfg.elitism_count, np); i < np; ++i)
      merged.push_back(std::move(pop[i]));
    std::sort(merged.begin(), merged.end(), by_value);
    merged.resize(np);
    pop = std::move(merged);
    res.trace.push_back(pop.front().value);
  }

  res.bits = pop.front().bits;
  res.x = pop.front().angles;
  res.value = pop.front().value;
  res.iterations = cfg.generations;
  return res;
}

Matrix unitary_from_coeffs(const RealVector& coeffs, const GeneratorSet& gens) {
  return herm_exp(gens.weighted_sum(coeffs), 1.0);
}

void SymmetrizedGenerator::accumulate(Complex coeff, Matrix& out) const {
  for (const auto& term : terms) term.accumulate(coeff, out);
}

Matrix SymmetrizedGenerator::dense(int dim) const {
  Matrix out = Matrix::Zero(dim, dim);
  accumulate(1.0, out);
  return out;
}

Matrix PermInvariantBasis::weighted_sum(const RealVector& coeffs) const {
  if (coeffs.size() != static_cast<Eigen::Index>(elements.size()))
    throw std::invalid_argument("coefficient length does not match basis");
  Matrix out = Matrix::Zero(dim(), dim());
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != 0.0) elements[i].accumulate(coeffs[i], out);
  return out;
}

PermInvariantBasis perm_invariant_basis(int q, int k) {
  if (q < 1 || q > 2 || k < 1 || k > 3)
    throw std::invalid_argument("perm_invariant_basis supports q in {1,2}, k in {1,2,3}");
  PermInvariantBasis basis;
  basis.q = q;
  basis.k = k;
  const int labels = 1 << (2 * q);  // 4^q block labels

  // dim formula: prod_{i=1}^{4^q-1} (k+i) / (4^q-1)!
  long long num = 1, den = 1;
  for (int i = 1; i <= labels - 1; ++i) {
    num *= (k + i);
    den *= i;
  }
  basis.dim_formula = num / den;

  // enumerate multisets of size k over block labels (non-decreasing tuples)
  std::vector<std::vector<int>> multisets;
  std::vector<int> cur(k, 0);
  for (;;) {
    multisets.push_back(cur);
    int pos = k - 1;
    while (pos >= 0 && cur[pos] == labels - 1) --pos;
    if (pos < 0) break;
    ++cur[pos];
    for (int j = pos + 1; j < k; ++j) cur[j] = cur[pos];
  }

  auto block_label = [&](int lbl) {
    std::string s(q, '0');
    for (int pos = q - 1; pos >= 0; --pos) {
      s[pos] = static_cast<char>('0' + (lbl & 3));
      lbl >>= 2;
    }
    return s;
  };

  for (const auto& ms : multisets) {
    if (std::all_of(ms.begin(), ms.end(), [](int v) { return v == 0; }))
      continue;  // global identity excluded
    std::set<std::vector<int>> perms;
    std::vector<int> arrangement = ms;
    std::sort(arrangement.begin(), arrangement.end());
    do {
      perms.insert(arrangement);
    } while (std::next_permutation(arrangement.begin(), arrangement.end()));
    SymmetrizedGenerator gen;
    for (const auto& ordering : perms) {
      std::string label;
      for (int blk : ordering) label += block_label(blk);
      gen.terms.emplace_back(label);
    }
    basis.elements.push_back(std::move(gen));
  }
  return basis;
}

Ket param_state(const RealVector& coeffs, const GeneratorSet& gens) {
  Matrix u = unitary_from_coeffs(coeffs, gens);
  Vector zero = Vector::Zero(gens.dim());
  zero[0] = 1.0;
  return Ket(u * zero);
}

Measurement param_projective(const RealVector& coeffs, const GeneratorSet& gens) {
  return Measurement::projective(unitary_from_coeffs(coeffs, gens));
}

Measurement param_projective(const RealVector& coeffs, const PermInvariantBasis& basis) {
  return Measurement::projective(herm_exp(basis.weighted_sum(coeffs), 1.0));
}

}  // namespace qmetro
