#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dll/linalg.hpp"

namespace dll::problems {

using linalg::Matrix;
using linalg::Vec;

enum class Family { Knapsack, ProdPlan };
enum class Split { Train, Validation, Test };

std::string family_name(Family f);
Family family_from_name(const std::string& name);
std::string split_name(Split s);
Split split_from_name(const std::string& name);

/// Continuous relaxation of a multi-dimensional knapsack:
///   min -p'x  s.t.  Wx <= b,  x in [0,1]^n.
struct KnapsackInstance {
  std::size_t m = 0;
  std::size_t n = 0;
  Vec p;     // item values, >= 0
  Matrix w;  // m x n resource use, >= 0
  Vec b;     // capacities, >= 0
  void validate() const;
};

/// Resource-constrained production/inventory planning in conic form:
///   min d'x + f't  s.t.  r'x <= b,  (x_j, t_j, sqrt2) in RSOC3.
struct ProdPlanInstance {
  std::size_t n = 0;
  Vec d, f, r;  // positive
  double b = 0.0;
  void validate() const;
};

/// Reference optimum cached alongside an instance. `dual` holds y for the
/// knapsack family and the scalar y* for production planning.
struct OracleInfo {
  double value = 0.0;
  Vec dual;
};

struct Record {
  std::size_t index = 0;
  Split split = Split::Train;
  std::variant<KnapsackInstance, ProdPlanInstance> instance;
  std::optional<OracleInfo> oracle;
};

struct Dataset {
  Family family = Family::Knapsack;
  std::uint64_t seed = 0;
  std::vector<Record> records;

  std::vector<const Record*> split_view(Split s) const;
  void validate() const;
};

// Generators are deterministic in (sizes, count, seed); instance i draws from
// rng::field_stream(seed, i, tag) streams so generation order is immaterial.
Dataset gen_knapsack(std::size_t m, std::size_t n, std::size_t count,
                     std::uint64_t seed);
Dataset gen_prodplan(std::size_t n, std::size_t count, std::uint64_t seed);

/// Labels records [0, train) train, [train, train+val) validation and the
/// rest test; sizes must partition the record count exactly.
void assign_splits(Dataset& ds, std::size_t train, std::size_t val,
                   std::size_t test);

double knapsack_objective(const KnapsackInstance& inst, const Vec& x);
/// Feasibility check; on failure `why` (when given) names the constraint.
bool knapsack_feasible(const KnapsackInstance& inst, const Vec& x,
                       double tol, std::string* why = nullptr);
double prodplan_objective(const ProdPlanInstance& inst, const Vec& x,
                          const Vec& t);
bool prodplan_feasible(const ProdPlanInstance& inst, const Vec& x,
                       const Vec& t, double tol, std::string* why = nullptr);

// JSONL with one schema-tagged instance per line; floats are written in
// shortest round-trip form. Paths ending in .gz are gzip-compressed.
std::string serialize(const Dataset& ds);
Dataset deserialize(const std::string& text);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace dll::problems
