#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace plma {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Koopmans-Beckmann instance: minimise sum_ij flow(i,j) * dist(perm(i), perm(j)).
struct QapInstance {
  int n = 0;
  Matrix flow;
  Matrix dist;
  std::string name;
  std::optional<double> best_known;

  QapInstance() = default;
  QapInstance(Matrix f, Matrix d, std::string nm = {}, std::optional<double> bk = std::nullopt);

  // Throws std::invalid_argument when shapes disagree or an entry is not finite.
  void validate() const;
};

// Undirected simple graph on vertices 1..n. Edges are stored 0-based with u < v.
struct BmGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::string name;

  BmGraph() = default;
  // Drops self loops, canonicalises orientation and removes duplicates.
  BmGraph(int n, std::vector<std::pair<int, int>> zero_based_edges, std::string nm = {});

  Matrix adjacency() const;
  std::vector<std::vector<int>> neighbors() const;
};

enum class MatrixOrder { FlowFirst, DistFirst };

QapInstance parse_qaplib(std::string_view text, MatrixOrder order = MatrixOrder::FlowFirst);
std::string write_qaplib(const QapInstance& inst);

struct SlnRecord {
  int n = 0;
  double value = 0.0;
  std::optional<std::vector<int>> perm;  // 1-based images
};

SlnRecord parse_sln(std::string_view text);
std::string write_sln(const SlnRecord& sln);

BmGraph parse_matrix_market(std::string_view text);

// Per-family matrix order overrides, keyed by name prefix (e.g. "tai..b").
// Format: JSON object {"<prefix>": "flow_first" | "dist_first", ...}.
class OrderTable {
 public:
  OrderTable() = default;
  static OrderTable parse(std::string_view json_text);
  MatrixOrder lookup(std::string_view instance_name) const;
  void set(std::string prefix, MatrixOrder order) { table_[std::move(prefix)] = order; }

 private:
  std::map<std::string, MatrixOrder, std::less<>> table_;
};

// Reads `<dir>/<name>.dat` and, when present, `<dir>/<name>.sln`.
QapInstance load_qaplib(const std::string& dir, const std::string& name,
                        const OrderTable& orders = {});

std::string read_file(const std::string& path);

// Synthetic generators. Pure functions of (n, seed).
QapInstance gen_uniform(int n, std::uint64_t seed);
QapInstance gen_geometric(int n, std::uint64_t seed);

}  // namespace plma
