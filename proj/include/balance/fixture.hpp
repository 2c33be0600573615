#pragma once

// Oracle comparisons driven by JSON fixtures.
//
//   {
//     "tensor": {"dims": [S, N, C], "data": [...]},
//     "pairs": [[0, 1], [2, 3]],
//     "edge_active": [1, 0],          // optional, default all active
//     "batches": [[0], [0, 2], [1, 2, 3]],
//     "sampled": {"M": 500, "seed": 7, "batches": [[0, 1, 2, 3, 4, 5]]},  // optional
//     "space": { ... }                // optional, see space_from_json
//   }

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "balance/acquisition.hpp"
#include "balance/batch_state.hpp"
#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/oracle.hpp"
#include "balance/partition.hpp"
#include "balance/tensor.hpp"
#include "balance/tensor_io.hpp"

namespace balance::oracle {

struct Fixture {
  std::optional<PredictionTensor> tensor;
  EnsemblePairs pairs;
  std::vector<std::vector<std::size_t>> batches;
  std::size_t sampled_m = 0;
  std::uint64_t sampled_seed = 0;
  std::vector<std::vector<std::size_t>> sampled_batches;
  std::optional<DiscreteHypothesisSpace> space;
};

struct Comparison {
  std::string op;
  std::size_t cases = 0;
  double max_abs_deviation = 0.0;
  double tolerance = 0.0;

  bool passed() const noexcept { return max_abs_deviation <= tolerance; }
};

inline Fixture fixture_from_json(const nlohmann::json& j) {
  Fixture f;
  try {
    if (!j.is_object()) throw FormatError("fixture must be a JSON object");
    if (j.contains("tensor")) {
      f.tensor = io::tensor_from_json(j.at("tensor"));
      for (const auto& p : j.at("pairs")) {
        f.pairs.pairs.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
      }
      f.pairs.edge_active = j.contains("edge_active") ? j.at("edge_active").get<std::vector<std::uint8_t>>()
                                                      : std::vector<std::uint8_t>(f.pairs.size(), 1);
      try {
        f.pairs.validate(f.tensor->num_hypotheses());
      } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("fixture pairs: ") + e.what());
      }
      f.batches = j.value("batches", std::vector<std::vector<std::size_t>>{});
      if (j.contains("sampled")) {
        const auto& s = j.at("sampled");
        f.sampled_m = s.at("M").get<std::size_t>();
        if (f.sampled_m == 0) throw FormatError("fixture: sampled M must be >= 1");
        f.sampled_seed = s.value("seed", std::uint64_t{0});
        f.sampled_batches = s.at("batches").get<std::vector<std::vector<std::size_t>>>();
      }
      for (const auto* list : {&f.batches, &f.sampled_batches}) {
        for (const auto& batch : *list) {
          if (batch.empty()) throw FormatError("fixture batch is empty");
          for (std::size_t x : batch) {
            if (x >= f.tensor->num_points()) throw FormatError("fixture batch index out of range");
          }
        }
      }
    }
    if (j.contains("space")) f.space = space_from_json(j.at("space"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("fixture: ") + e.what());
  }
  return f;
}

inline Fixture load_fixture(const std::string& path) {
  const auto bytes = io::detail::read_all(path);
  try {
    return fixture_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("fixture '" + path + "': " + e.what());
  }
}

namespace detail {

inline const PredictionTensor& need_tensor(const Fixture& f) {
  if (!f.tensor) throw FormatError("fixture has no tensor");
  return *f.tensor;
}

/// Per-pair products recomputed from the labels of one configuration.
inline void naive_products(const PredictionTensor& tensor, std::size_t h, std::span<const std::size_t> points,
                           std::span<const Label> labels, double& product, double& peak) {
  product = 1.0;
  peak = 1.0;
  for (std::size_t t = 0; t < points.size(); ++t) {
    const auto row = tensor.row(h, points[t]);
    product *= row[labels[t]];
    peak *= *std::max_element(row.begin(), row.end());
  }
}

inline double state_deviation(const BatchState& state, const EnsemblePairs& pairs, const PredictionTensor& tensor,
                              const std::function<std::vector<Label>(std::size_t)>& labels_of) {
  double worst = 0.0;
  for (std::size_t j = 0; j < state.num_configs; ++j) {
    const auto labels = labels_of(j);
    double mass = 0.0;
    for (std::size_t k = 0; k < state.num_pairs; ++k) {
      double p = 0.0, a = 0.0, pp = 0.0, ap = 0.0;
      naive_products(tensor, pairs.pairs[k].first, state.selected, labels, p, a);
      naive_products(tensor, pairs.pairs[k].second, state.selected, labels, pp, ap);
      worst = std::max({worst, std::abs(p - state.p(k, j)), std::abs(pp - state.pp(k, j)),
                        std::abs(a - state.A[k]), std::abs(ap - state.Ap[k])});
      mass += p + pp;
    }
    mass /= 2.0 * static_cast<double>(state.num_pairs);
    worst = std::max(worst, std::abs(mass - state.proposal_mass[j]));
  }
  return worst;
}

}  // namespace detail

/// balance_exact against the literal-loop brute force on every batch.
inline Comparison compare_balance_bruteforce(const Fixture& f, double tolerance = 1e-9) {
  const auto& tensor = detail::need_tensor(f);
  Comparison out{"balance-vs-bruteforce", 0, 0.0, tolerance};
  for (const auto& batch : f.batches) {
    const double fast = balance_exact(batch, f.pairs, tensor);
    const double slow = brute_force_delta(f.pairs, tensor, batch);
    out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(fast - slow));
    ++out.cases;
  }
  return out;
}

/// Incremental state matrices against from-scratch products, in exact mode
/// for `batches` and in sampled mode for `sampled.batches`.
inline Comparison compare_recurrence_naive(const Fixture& f, double tolerance = 1e-12) {
  const auto& tensor = detail::need_tensor(f);
  const std::size_t classes = tensor.num_classes();
  Comparison out{"recurrence-vs-naive", 0, 0.0, tolerance};
  for (const auto& batch : f.batches) {
    BatchState state = empty_state(f.pairs, classes);
    for (std::size_t x : batch) {
      state = extend_state(state, x, f.pairs, tensor);
      const std::size_t width = state.selected.size();
      const auto labels_of = [&](std::size_t flat) {
        std::vector<Label> labels(width);
        for (std::size_t t = width; t-- > 0;) {
          labels[t] = static_cast<Label>(flat % classes);
          flat /= classes;
        }
        return labels;
      };
      out.max_abs_deviation = std::max(out.max_abs_deviation, detail::state_deviation(state, f.pairs, tensor, labels_of));
    }
    ++out.cases;
  }
  for (const auto& batch : f.sampled_batches) {
    Rng rng(f.sampled_seed);
    BatchState state = sampled_root(f.pairs, classes, f.sampled_m);
    for (std::size_t x : batch) {
      state = sample_configs(state, x, f.pairs, tensor, rng);
      const auto labels_of = [&](std::size_t j) {
        const auto row = state.config(j);
        return std::vector<Label>(row.begin(), row.end());
      };
      out.max_abs_deviation = std::max(out.max_abs_deviation, detail::state_deviation(state, f.pairs, tensor, labels_of));
    }
    ++out.cases;
  }
  return out;
}

/// ECED against EC2 on a deterministic space, for every point under the
/// prior, with FFT classes of radius `partition_radius`.
inline Comparison compare_ec2_eced(const Fixture& f, double partition_radius = 0.0, double tolerance = 1e-12) {
  if (!f.space) throw FormatError("fixture has no space");
  const auto& space = *f.space;
  if (!space.deterministic()) throw FormatError("ec2-vs-eced needs a deterministic space");
  Comparison out{"ec2-vs-eced", 0, 0.0, tolerance};
  const auto partition = fft_cluster(
      space.num_hypotheses, [&](std::size_t a, std::size_t b) { return space.dist(a, b); }, partition_radius);
  const auto state = initial_state(space);
  for (std::size_t x = 0; x < space.num_points; ++x) {
    const double a = ec2_score(space, state, partition, x);
    const double b = eced_score(space, state, partition, x);
    out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(a - b));
    ++out.cases;
  }
  return out;
}

inline Comparison run_comparison(const std::string& op, const Fixture& f) {
  if (op == "balance-vs-bruteforce") return compare_balance_bruteforce(f);
  if (op == "recurrence-vs-naive") return compare_recurrence_naive(f);
  if (op == "ec2-vs-eced") return compare_ec2_eced(f);
  throw ConfigError("unknown oracle op '" + op + "'");
}

inline std::string comparison_to_json(const Comparison& c) {
  const nlohmann::json j = {{"op", c.op},
                            {"cases", c.cases},
                            {"max_abs_deviation", c.max_abs_deviation},
                            {"tolerance", c.tolerance},
                            {"pass", c.passed()}};
  return j.dump(2) + "\n";
}

}  // namespace balance::oracle
