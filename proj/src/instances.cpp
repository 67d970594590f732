#include "plma/instances.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plma/rng.hpp"

namespace plma {

namespace {

struct Token {
  std::string_view text;
  std::size_t offset;
};

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view s) : s_(s) {}

  std::optional<Token> next() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ >= s_.size()) return std::nullopt;
    const std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return Token{s_.substr(start, pos_ - start), start};
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

double to_real(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError("malformed number '" + std::string(t.text) + "'", t.offset);
  }
  return v;
}

long long to_int(const Token& t) {
  long long v = 0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("malformed integer '" + std::string(t.text) + "'", t.offset);
  }
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string format_entry(double v) {
  if (v == std::nearbyint(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

QapInstance::QapInstance(Matrix f, Matrix d, std::string nm, std::optional<double> bk)
    : n(static_cast<int>(f.rows())), flow(std::move(f)), dist(std::move(d)), name(std::move(nm)),
      best_known(bk) {
  validate();
}

void QapInstance::validate() const {
  if (n <= 0) throw std::invalid_argument("instance size must be positive");
  if (flow.rows() != n || flow.cols() != n || dist.rows() != n || dist.cols() != n) {
    throw std::invalid_argument("flow and distance must both be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
  if (!flow.allFinite() || !dist.allFinite()) {
    throw std::invalid_argument("instance contains non-finite entries");
  }
}

BmGraph::BmGraph(int n_, std::vector<std::pair<int, int>> e, std::string nm)
    : n(n_), name(std::move(nm)) {
  if (n <= 0) throw std::invalid_argument("graph size must be positive");
  std::set<std::pair<int, int>> unique;
  for (auto [u, v] : e) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw std::out_of_range("edge endpoint out of range");
    if (u == v) continue;
    unique.insert({std::min(u, v), std::max(u, v)});
  }
  edges.assign(unique.begin(), unique.end());
}

Matrix BmGraph::adjacency() const {
  Matrix a = Matrix::Zero(n, n);
  for (auto [u, v] : edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

std::vector<std::vector<int>> BmGraph::neighbors() const {
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return adj;
}

QapInstance parse_qaplib(std::string_view text, MatrixOrder order) {
  Tokenizer tok(text);
  auto first = tok.next();
  if (!first) throw ParseError("empty QAPLIB text", 0);
  const long long n = to_int(*first);
  if (n <= 0) throw ParseError("instance size must be positive", first->offset);
  if (n > 100000) throw ParseError("instance size too large", first->offset);

  Matrix m[2] = {Matrix(n, n), Matrix(n, n)};
  for (auto& mat : m) {
    for (long long i = 0; i < n; ++i) {
      for (long long j = 0; j < n; ++j) {
        auto t = tok.next();
        if (!t) {
          throw ParseError("expected " + std::to_string(2 * n * n) + " matrix entries, input ended",
                           text.size());
        }
        mat(i, j) = to_real(*t);
      }
    }
  }
  if (auto extra = tok.next()) {
    throw ParseError("trailing token after " + std::to_string(2 * n * n) + " matrix entries",
                     extra->offset);
  }
  if (order == MatrixOrder::DistFirst) std::swap(m[0], m[1]);
  return QapInstance(std::move(m[0]), std::move(m[1]));
}

std::string write_qaplib(const QapInstance& inst) {
  std::ostringstream os;
  os << inst.n << "\n";
  for (const Matrix* mat : {&inst.flow, &inst.dist}) {
    os << "\n";
    for (int i = 0; i < inst.n; ++i) {
      for (int j = 0; j < inst.n; ++j) {
        if (j) os << ' ';
        os << format_entry((*mat)(i, j));
      }
      os << "\n";
    }
  }
  return os.str();
}

SlnRecord parse_sln(std::string_view text) {
  Tokenizer tok(text);
  std::vector<Token> tokens;
  while (auto t = tok.next()) tokens.push_back(*t);
  if (tokens.size() < 2) throw ParseError("solution header needs 'n value'", text.size());

  SlnRecord out;
  const long long n = to_int(tokens[0]);
  if (n <= 0) throw ParseError("solution size must be positive", tokens[0].offset);
  out.n = static_cast<int>(n);
  out.value = to_real(tokens[1]);
  if (tokens.size() == 2) return out;
  if (tokens.size() != static_cast<std::size_t>(2 + n)) {
    throw ParseError("expected " + std::to_string(n) + " permutation entries, found " +
                         std::to_string(tokens.size() - 2),
                     tokens[2].offset);
  }
  std::vector<int> perm(n);
  std::vector<char> seen(n + 1, 0);
  for (long long i = 0; i < n; ++i) {
    const auto& t = tokens[2 + i];
    const long long v = to_int(t);
    if (v < 1 || v > n) throw ParseError("permutation entry out of range", t.offset);
    if (seen[v]) throw ParseError("repeated image " + std::to_string(v), t.offset);
    seen[v] = 1;
    perm[i] = static_cast<int>(v);
  }
  out.perm = std::move(perm);
  return out;
}

std::string write_sln(const SlnRecord& sln) {
  std::ostringstream os;
  os << sln.n << ' ' << format_entry(sln.value) << "\n";
  if (sln.perm) {
    for (std::size_t i = 0; i < sln.perm->size(); ++i) {
      if (i) os << ' ';
      os << (*sln.perm)[i];
    }
    os << "\n";
  }
  return os.str();
}

BmGraph parse_matrix_market(std::string_view text) {
  std::size_t line_start = 0;
  auto next_line = [&](std::string_view& line, std::size_t& offset) {
    if (line_start >= text.size()) return false;
    std::size_t end = text.find('\n', line_start);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(line_start, end - line_start);
    offset = line_start;
    line_start = end + 1;
    return true;
  };

  std::string_view line;
  std::size_t offset = 0;
  if (!next_line(line, offset)) throw ParseError("empty MatrixMarket text", 0);
  {
    std::istringstream hs{std::string(line)};
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix") {
      throw ParseError("missing %%MatrixMarket matrix header", offset);
    }
    if (lower(format) != "coordinate") {
      throw ParseError("unsupported MatrixMarket format '" + format + "'", offset);
    }
    const std::string f = lower(field);
    if (f != "real" && f != "integer" && f != "pattern" && f != "complex") {
      throw ParseError("unsupported MatrixMarket field '" + field + "'", offset);
    }
    const std::string s = lower(symmetry);
    if (s != "general" && s != "symmetric" && s != "skew-symmetric" && s != "hermitian") {
      throw ParseError("unsupported MatrixMarket symmetry '" + symmetry + "'", offset);
    }
  }

  // Skip comments and blank lines up to the size line.
  for (;;) {
    if (!next_line(line, offset)) throw ParseError("missing size line", text.size());
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string_view::npos || line[p] == '%') continue;
    break;
  }
  Tokenizer size_tok(line);
  std::vector<long long> dims;
  while (auto t = size_tok.next()) dims.push_back(to_int(Token{t->text, offset + t->offset}));
  if (dims.size() != 3) throw ParseError("size line must be 'rows cols nnz'", offset);
  if (dims[0] != dims[1]) throw ParseError("bandwidth needs a square matrix", offset);
  if (dims[0] <= 0) throw ParseError("matrix size must be positive", offset);
  const int n = static_cast<int>(dims[0]);

  std::vector<std::pair<int, int>> edges;
  long long entries = 0;
  while (next_line(line, offset)) {
    const auto p = line.find_first_not_of(" \t\r");
    if (p == std::string_view::npos || line[p] == '%') continue;
    Tokenizer et(line);
    auto r = et.next();
    auto c = et.next();
    if (!r || !c) throw ParseError("entry needs row and column", offset);
    const long long row = to_int(Token{r->text, offset + r->offset});
    const long long col = to_int(Token{c->text, offset + c->offset});
    if (row < 1 || row > n || col < 1 || col > n) {
      throw ParseError("index (" + std::to_string(row) + "," + std::to_string(col) +
                           ") outside declared size " + std::to_string(n),
                       offset + r->offset);
    }
    ++entries;
    if (row != col) edges.emplace_back(static_cast<int>(row - 1), static_cast<int>(col - 1));
  }
  if (entries != dims[2]) {
    throw ParseError("declared " + std::to_string(dims[2]) + " entries, found " +
                         std::to_string(entries),
                     text.size());
  }
  return BmGraph(n, std::move(edges));
}

OrderTable OrderTable::parse(std::string_view json_text) {
  OrderTable table;
  const auto j = nlohmann::json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("order table must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const std::string v = value.get<std::string>();
    if (v == "flow_first") {
      table.set(key, MatrixOrder::FlowFirst);
    } else if (v == "dist_first") {
      table.set(key, MatrixOrder::DistFirst);
    } else {
      throw std::invalid_argument("unknown matrix order '" + v + "' for '" + key + "'");
    }
  }
  return table;
}

MatrixOrder OrderTable::lookup(std::string_view instance_name) const {
  // Longest matching prefix wins.
  MatrixOrder order = MatrixOrder::FlowFirst;
  std::size_t best = 0;
  for (const auto& [prefix, o] : table_) {
    if (prefix.size() >= best && instance_name.substr(0, prefix.size()) == prefix) {
      best = prefix.size();
      order = o;
    }
  }
  return order;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QapInstance load_qaplib(const std::string& dir, const std::string& name,
                        const OrderTable& orders) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  QapInstance inst = parse_qaplib(read_file((base / (name + ".dat")).string()),
                                  orders.lookup(name));
  inst.name = name;
  const fs::path sln = base / (name + ".sln");
  if (fs::exists(sln)) {
    const SlnRecord rec = parse_sln(read_file(sln.string()));
    if (rec.n != inst.n) {
      throw std::runtime_error("solution size " + std::to_string(rec.n) + " differs from " +
                               name + " size " + std::to_string(inst.n));
    }
    inst.best_known = rec.value;
  }
  return inst;
}

QapInstance gen_uniform(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_uniform needs n >= 2");
  Rng base(seed, Rng::tag("instance/uniform"));
  Matrix m[2];
  for (int which = 0; which < 2; ++which) {
    Rng rng = base.split(which);
    Matrix raw(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) raw(i, j) = rng.uniform();
    m[which] = (raw + raw.transpose()) / 2.0;
  }
  return QapInstance(std::move(m[0]), std::move(m[1]),
                     "uniform-n" + std::to_string(n) + "-s" + std::to_string(seed));
}

QapInstance gen_geometric(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_geometric needs n >= 2");
  Rng base(seed, Rng::tag("instance/geometric"));

  Rng pts = base.split(0);
  std::vector<std::array<double, 2>> xy(n);
  for (auto& p : xy) p = {pts.uniform(), pts.uniform()};
  Matrix dist(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      dist(i, j) = std::hypot(xy[i][0] - xy[j][0], xy[i][1] - xy[j][1]);

  Rng fr = base.split(1);
  Matrix raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = fr.uniform();
  Matrix flow = (raw + raw.transpose()) / 2.0;
  flow.diagonal().setZero();

  // Zero out floor(0.7 * pairs) unordered pairs chosen without replacement.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  const std::size_t drop = pairs.size() * 7 / 10;
  Rng pick = base.split(2);
  for (std::size_t k = 0; k < drop; ++k) {
    const std::size_t r = k + pick.below(pairs.size() - k);
    std::swap(pairs[k], pairs[r]);
    flow(pairs[k].first, pairs[k].second) = 0.0;
    flow(pairs[k].second, pairs[k].first) = 0.0;
  }
  return QapInstance(std::move(flow), std::move(dist),
                     "geometric-n" + std::to_string(n) + "-s" + std::to_string(seed));
}

}  // namespace plma
