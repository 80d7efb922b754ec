#include "dll/problems.hpp"

#include <zlib.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "dll/rng.hpp"

namespace dll::problems {

using nlohmann::json;

namespace {

// Field tags for rng::field_stream; fixed forever for reproducibility.
enum FieldTag : std::uint64_t {
  kKnapsackWeights = 1,
  kKnapsackValues = 2,
  kProdDemand = 11,
  kProdUnitHolding = 12,
  kProdHoldingRate = 13,
  kProdOrderingAlpha = 14,
  kProdResourceBeta = 15,
  kProdBudgetEta = 16,
};

json vec_to_json(const Vec& v) { return json(v); }

Vec vec_from_json(const json& j) { return j.get<Vec>(); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols) {
      throw std::invalid_argument("ragged matrix rows");
    }
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c);
  }
  return m;
}

constexpr const char* kSchema = "dll-dataset-v1";

}  // namespace

std::string family_name(Family f) {
  return f == Family::Knapsack ? "knapsack" : "prodplan";
}

Family family_from_name(const std::string& name) {
  if (name == "knapsack") return Family::Knapsack;
  if (name == "prodplan") return Family::ProdPlan;
  throw std::invalid_argument("unknown family: " + name);
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "validation") return Split::Validation;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split: " + name);
}

void KnapsackInstance::validate() const {
  if (p.size() != n || b.size() != m || w.rows() != m || w.cols() != n) {
    throw std::invalid_argument("KnapsackInstance: inconsistent dimensions");
  }
  for (double v : p)
    if (!(v >= 0.0)) throw std::invalid_argument("KnapsackInstance: p < 0");
  for (double v : b)
    if (!(v >= 0.0)) throw std::invalid_argument("KnapsackInstance: b < 0");
  for (double v : w.data())
    if (!(v >= 0.0)) throw std::invalid_argument("KnapsackInstance: W < 0");
}

void ProdPlanInstance::validate() const {
  if (d.size() != n || f.size() != n || r.size() != n || n == 0) {
    throw std::invalid_argument("ProdPlanInstance: inconsistent dimensions");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(d[j] > 0.0 && f[j] > 0.0 && r[j] > 0.0)) {
      throw std::invalid_argument("ProdPlanInstance: d, f, r must be > 0");
    }
  }
  if (!(b > 0.0)) throw std::invalid_argument("ProdPlanInstance: b must be > 0");
}

std::vector<const Record*> Dataset::split_view(Split s) const {
  std::vector<const Record*> out;
  for (const Record& r : records)
    if (r.split == s) out.push_back(&r);
  return out;
}

void Dataset::validate() const {
  for (const Record& r : records) {
    if (family == Family::Knapsack) {
      std::get<KnapsackInstance>(r.instance).validate();
    } else {
      std::get<ProdPlanInstance>(r.instance).validate();
    }
  }
}

Dataset gen_knapsack(std::size_t m, std::size_t n, std::size_t count,
                     std::uint64_t seed) {
  if (m < 1 || n < 1 || count < 1) {
    throw std::invalid_argument("gen_knapsack: m, n, count must be >= 1");
  }
  Dataset ds;
  ds.family = Family::Knapsack;
  ds.seed = seed;
  ds.records.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    KnapsackInstance inst;
    inst.m = m;
    inst.n = n;
    inst.w = Matrix(m, n);
    auto ws = rng::field_stream(seed, idx, kKnapsackWeights);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        inst.w(i, j) = static_cast<double>(ws.uniform_int(1, 1000));

    inst.b.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      double row_sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) row_sum += inst.w(i, j);
      double cap = std::round(0.25 * row_sum);
      // keep 0 < b < sum W even for degenerate one-item rows
      if (!(cap > 0.0) || !(cap < row_sum)) cap = 0.25 * row_sum;
      inst.b[i] = cap;
    }

    auto ps = rng::field_stream(seed, idx, kKnapsackValues);
    inst.p.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      double col_sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) col_sum += inst.w(i, j);
      inst.p[j] = std::round(col_sum / static_cast<double>(m) +
                             500.0 * ps.uniform());
    }
    inst.validate();

    Record rec;
    rec.index = idx;
    rec.instance = std::move(inst);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

Dataset gen_prodplan(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n < 1 || count < 1) {
    throw std::invalid_argument("gen_prodplan: n, count must be >= 1");
  }
  Dataset ds;
  ds.family = Family::ProdPlan;
  ds.seed = seed;
  ds.records.reserve(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    ProdPlanInstance inst;
    inst.n = n;
    inst.d.resize(n);
    inst.f.resize(n);
    inst.r.resize(n);

    auto demand = rng::field_stream(seed, idx, kProdDemand);
    auto unit_holding = rng::field_stream(seed, idx, kProdUnitHolding);
    auto holding_rate = rng::field_stream(seed, idx, kProdHoldingRate);
    auto ordering = rng::field_stream(seed, idx, kProdOrderingAlpha);
    auto resource = rng::field_stream(seed, idx, kProdResourceBeta);
    auto budget = rng::field_stream(seed, idx, kProdBudgetEta);

    double r_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double total_demand = demand.uniform(1.0, 100.0);
      const double cp = unit_holding.uniform(1.0, 10.0);
      const double cr = holding_rate.uniform(0.05, 0.2);
      const double alpha = ordering.uniform(0.1, 1.5);
      const double beta = resource.uniform(0.1, 2.0);
      inst.d[j] = 0.5 * cp * cr;
      inst.f[j] = alpha * cp * total_demand;
      inst.r[j] = beta * cp;
      r_sum += inst.r[j];
    }
    inst.b = budget.uniform(0.25, 0.75) * r_sum;
    inst.validate();

    Record rec;
    rec.index = idx;
    rec.instance = std::move(inst);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void assign_splits(Dataset& ds, std::size_t train, std::size_t val,
                   std::size_t test) {
  if (train + val + test != ds.records.size()) {
    throw std::invalid_argument(
        "assign_splits: sizes " + std::to_string(train) + "+" +
        std::to_string(val) + "+" + std::to_string(test) +
        " do not partition " + std::to_string(ds.records.size()) + " records");
  }
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    ds.records[i].split = i < train                ? Split::Train
                          : i < train + val        ? Split::Validation
                                                   : Split::Test;
  }
}

double knapsack_objective(const KnapsackInstance& inst, const Vec& x) {
  if (x.size() != inst.n) {
    throw std::invalid_argument("knapsack_objective: dimension mismatch");
  }
  return -linalg::dot(inst.p, x);
}

bool knapsack_feasible(const KnapsackInstance& inst, const Vec& x, double tol,
                       std::string* why) {
  if (x.size() != inst.n) {
    throw std::invalid_argument("knapsack_feasible: dimension mismatch");
  }
  for (std::size_t j = 0; j < inst.n; ++j) {
    if (x[j] < -tol || x[j] > 1.0 + tol) {
      if (why) *why = "box bound on x[" + std::to_string(j) + "]";
      return false;
    }
  }
  const Vec wx = inst.w.apply(x);
  for (std::size_t i = 0; i < inst.m; ++i) {
    if (wx[i] > inst.b[i] + tol * (1.0 + std::abs(inst.b[i]))) {
      if (why) *why = "resource row " + std::to_string(i);
      return false;
    }
  }
  return true;
}

double prodplan_objective(const ProdPlanInstance& inst, const Vec& x,
                          const Vec& t) {
  if (x.size() != inst.n || t.size() != inst.n) {
    throw std::invalid_argument("prodplan_objective: dimension mismatch");
  }
  return linalg::dot(inst.d, x) + linalg::dot(inst.f, t);
}

bool prodplan_feasible(const ProdPlanInstance& inst, const Vec& x,
                       const Vec& t, double tol, std::string* why) {
  if (x.size() != inst.n || t.size() != inst.n) {
    throw std::invalid_argument("prodplan_feasible: dimension mismatch");
  }
  const double rx = linalg::dot(inst.r, x);
  if (rx > inst.b + tol * (1.0 + std::abs(inst.b))) {
    if (why) *why = "resource constraint r'x <= b";
    return false;
  }
  for (std::size_t j = 0; j < inst.n; ++j) {
    // (x_j, t_j, sqrt2) in RSOC3 means 2 x_j t_j >= 2 with x_j, t_j >= 0.
    if (x[j] < -tol || t[j] < -tol || x[j] * t[j] < 1.0 - tol) {
      if (why) *why = "conic constraint on item " + std::to_string(j);
      return false;
    }
  }
  return true;
}

std::string serialize(const Dataset& ds) {
  std::string out;
  for (const Record& rec : ds.records) {
    json line;
    line["schema"] = kSchema;
    line["family"] = family_name(ds.family);
    line["seed"] = ds.seed;
    line["index"] = rec.index;
    line["split"] = split_name(rec.split);
    if (ds.family == Family::Knapsack) {
      const auto& inst = std::get<KnapsackInstance>(rec.instance);
      line["m"] = inst.m;
      line["n"] = inst.n;
      line["p"] = vec_to_json(inst.p);
      line["w"] = matrix_to_json(inst.w);
      line["b"] = vec_to_json(inst.b);
    } else {
      const auto& inst = std::get<ProdPlanInstance>(rec.instance);
      line["n"] = inst.n;
      line["d"] = vec_to_json(inst.d);
      line["f"] = vec_to_json(inst.f);
      line["r"] = vec_to_json(inst.r);
      line["b"] = inst.b;
    }
    if (rec.oracle) {
      line["oracle"] = {{"value", rec.oracle->value},
                        {"dual", vec_to_json(rec.oracle->dual)}};
    }
    out += line.dump();
    out += '\n';
  }
  return out;
}

Dataset deserialize(const std::string& text) {
  Dataset ds;
  bool first = true;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("dataset line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
    try {
      const std::string schema = j.at("schema");
      if (schema != kSchema) {
        throw std::invalid_argument("unsupported schema '" + schema + "'");
      }
      const Family fam = family_from_name(j.at("family"));
      if (first) {
        ds.family = fam;
        ds.seed = j.at("seed");
        first = false;
      } else if (fam != ds.family) {
        throw std::invalid_argument("mixed families in one dataset");
      }
      Record rec;
      rec.index = j.at("index");
      rec.split = split_from_name(j.at("split"));
      if (fam == Family::Knapsack) {
        KnapsackInstance inst;
        inst.m = j.at("m");
        inst.n = j.at("n");
        inst.p = vec_from_json(j.at("p"));
        inst.w = matrix_from_json(j.at("w"));
        inst.b = vec_from_json(j.at("b"));
        inst.validate();
        rec.instance = std::move(inst);
      } else {
        ProdPlanInstance inst;
        inst.n = j.at("n");
        inst.d = vec_from_json(j.at("d"));
        inst.f = vec_from_json(j.at("f"));
        inst.r = vec_from_json(j.at("r"));
        inst.b = j.at("b");
        inst.validate();
        rec.instance = std::move(inst);
      }
      if (j.contains("oracle")) {
        OracleInfo info;
        info.value = j.at("oracle").at("value");
        info.dual = vec_from_json(j.at("oracle").at("dual"));
        rec.oracle = std::move(info);
      }
      ds.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw std::invalid_argument("dataset line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  const std::string text = serialize(ds);
  if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
    gzFile gz = gzopen(path.c_str(), "wb");
    if (!gz) throw std::runtime_error("cannot open for writing: " + path);
    const int written =
        gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
    gzclose(gz);
    if (written != static_cast<int>(text.size())) {
      throw std::runtime_error("short gzip write: " + path);
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::string text;
  if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw std::runtime_error("cannot open for reading: " + path);
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(gz, buf, sizeof buf)) > 0) text.append(buf, got);
    gzclose(gz);
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return deserialize(text);
}

}  // namespace dll::problems
