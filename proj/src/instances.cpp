#include "ags/instances.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "ags/errors.hpp"

namespace ags {

namespace {

using nlohmann::json;

// ---- base64 (RFC 4648, no line breaks) ----

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    unsigned v = data[i] << 16;
    if (i + 1 < len) v |= data[i + 1] << 8;
    if (i + 2 < len) v |= data[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < len ? kB64Alphabet[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? kB64Alphabet[v & 63] : '=');
  }
  return out;
}

std::vector<unsigned char> b64_decode(const std::string& s) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> out;
  out.reserve(s.size() / 4 * 3);
  int buf = 0, bits = 0;
  for (char c : s) {
    if (c == '=') break;
    const int v = val(c);
    if (v < 0) throw IoError("base64: invalid character");
    buf = (buf << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((buf >> bits) & 0xff));
    }
  }
  return out;
}

constexpr int kInlineLimit = 10000;

json matrix_to_json(const MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  if (m.size() <= kInlineLimit) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    j["data"] = std::move(data);
  } else {
    std::vector<double> rowmajor(static_cast<std::size_t>(m.size()));
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) rowmajor[idx++] = m(r, c);
    }
    j["b64"] = b64_encode(
        reinterpret_cast<const unsigned char*>(rowmajor.data()),
        rowmajor.size() * sizeof(double));
  }
  return j;
}

MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  MatrixXd m(rows, cols);
  if (j.contains("data")) {
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw IoError("matrix: data length mismatch");
    }
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = data[idx++].get<double>();
      }
    }
  } else {
    const auto bytes = b64_decode(j.at("b64").get<std::string>());
    if (bytes.size() != static_cast<std::size_t>(rows * cols) * sizeof(double)) {
      throw IoError("matrix: base64 length mismatch");
    }
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        double v;
        std::memcpy(&v, bytes.data() + idx * sizeof(double), sizeof(double));
        m(r, c) = v;
        ++idx;
      }
    }
  }
  return m;
}

json vector_to_json(const VectorXd& v) {
  json data = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v[i]);
  return data;
}

VectorXd vector_from_json(const json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

MatrixXd fill_uniform(Rng& rng, int rows, int cols, double lo, double hi) {
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

MatrixXd fill_normal(Rng& rng, int rows, int cols) {
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

}  // namespace

LmaxEstimate estimate_lmax(const std::function<VectorXd(const VectorXd&)>& op,
                           int dim, double tol, int max_iters,
                           std::uint64_t seed) {
  if (dim < 1) throw InvalidConstants("estimate_lmax: dim must be >= 1");
  Rng rng(seed);
  VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  v /= v.norm();
  LmaxEstimate est;
  double rayleigh = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    VectorXd w = op(v);
    const double r = v.dot(w);
    est.iterations = it;
    const double wn = w.norm();
    if (!(wn > 0.0)) {  // operator annihilated v: lmax is 0 on this start
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    v = w / wn;
    if (it > 1 && std::abs(r - rayleigh) <= tol * std::max(1.0, std::abs(r))) {
      rayleigh = r;
      est.converged = true;
      break;
    }
    rayleigh = r;
  }
  // One extra Rayleigh refinement, then an upper-bias safety factor.
  const VectorXd w = op(v);
  const double refined = v.dot(w);
  est.value = std::max(rayleigh, refined) * (1.0 + tol);
  return est;
}

PortfolioInstance gen_portfolio(int n, int m, double target_ratio,
                                std::uint64_t seed) {
  if (n < 2 || m < 1) throw InvalidConstants("gen_portfolio: need n>=2, m>=1");
  if (!(target_ratio >= 1.0)) {
    throw InvalidConstants("gen_portfolio: target_ratio must be >= 1");
  }
  PortfolioInstance inst;
  inst.n = n;
  inst.m = m;
  inst.seed = seed;
  inst.target_ratio = target_ratio;
  inst.eta = 1.0;

  Rng rng_b(substream_seed(seed, "b"));
  inst.b = VectorXd(n);
  for (int i = 0; i < n; ++i) inst.b[i] = rng_b.uniform(0.0, 5.0);

  Rng rng_a(substream_seed(seed, "A"));
  inst.A = fill_uniform(rng_a, m, n, 0.0, 1.0);

  Rng rng_f(substream_seed(seed, "B"));
  const int mb = (m + 1) / 2;
  const MatrixXd B = fill_normal(rng_f, mb, m);
  inst.F = B.transpose() * B;

  const MatrixXd gram = inst.A.transpose() * inst.F * inst.A;
  inst.M = estimate_lmax([&](const VectorXd& v) { return gram * v; }, n).value;
  inst.L = inst.M / target_ratio;

  Rng rng_c(substream_seed(seed, "C"));
  const int nc = (n + 1) / 2;
  const MatrixXd C = fill_normal(rng_c, nc, n);
  const MatrixXd ctc = C.transpose() * C;
  const double ctc_lmax =
      estimate_lmax([&](const VectorXd& v) { return ctc * v; }, n).value;
  inst.D = (inst.L / ctc_lmax) * ctc;
  return inst;
}

SmoothOracle portfolio_f(const PortfolioInstance& inst) {
  SmoothOracle f;
  const MatrixXd D = inst.D;
  f.value = [D](const VectorXd& x) { return 0.5 * x.dot(D * x); };
  f.gradient = [D](const VectorXd& x) { return VectorXd(D * x); };
  f.lipschitz = inst.L;
  return f;
}

SmoothOracle portfolio_h(const PortfolioInstance& inst) {
  SmoothOracle h;
  const MatrixXd A = inst.A;
  const MatrixXd F = inst.F;
  h.value = [A, F](const VectorXd& x) {
    const VectorXd ax = A * x;
    return 0.5 * ax.dot(F * ax);
  };
  h.gradient = [A, F](const VectorXd& x) {
    return VectorXd(A.transpose() * (F * (A * x)));
  };
  h.lipschitz = inst.M;
  return h;
}

FeasibleSet portfolio_set(const PortfolioInstance& inst) {
  return FeasibleSet::SimplexHalfspace(inst.b, inst.eta);
}

VectorXd portfolio_start(const PortfolioInstance& inst) {
  VectorXd x = VectorXd::Constant(inst.n, 1.0 / inst.n);
  const double bx = inst.b.dot(x);
  if (bx >= inst.eta) return x;
  int best = 0;
  inst.b.maxCoeff(&best);
  // Blend toward the best-return vertex until b'x = eta (plus margin).
  const double bmax = inst.b[best];
  double t = (inst.eta - bx) / (bmax - bx);
  t = std::min(1.0, t * 1.01);
  VectorXd vertex = VectorXd::Zero(inst.n);
  vertex[best] = 1.0;
  return (1.0 - t) * x + t * vertex;
}

VectorXd tv_phantom(int rows, int cols) {
  VectorXd x(static_cast<Eigen::Index>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int ring = std::min(std::min(r, rows - 1 - r),
                                std::min(c, cols - 1 - c));
      x[static_cast<Eigen::Index>(r) * cols + c] = (ring % 4) / 3.0;
    }
  }
  return x;
}

LinearOperator tv_diff_operator(int rows, int cols) {
  const int n = rows * cols;
  LinearOperator op;
  op.rows = 2 * n;
  op.cols = n;
  op.norm_bound = std::sqrt(8.0);
  op.apply = [rows, cols, n](const VectorXd& x) {
    VectorXd y = VectorXd::Zero(2 * n);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int i = r * cols + c;
        if (c + 1 < cols) y[2 * i] = x[i + 1] - x[i];
        if (r + 1 < rows) y[2 * i + 1] = x[i + cols] - x[i];
      }
    }
    return y;
  };
  op.apply_adjoint = [rows, cols, n](const VectorXd& y) {
    VectorXd x = VectorXd::Zero(n);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const int i = r * cols + c;
        if (c + 1 < cols) {
          x[i + 1] += y[2 * i];
          x[i] -= y[2 * i];
        }
        if (r + 1 < rows) {
          x[i + cols] += y[2 * i + 1];
          x[i] -= y[2 * i + 1];
        }
      }
    }
    return x;
  };
  return op;
}

TvInstance gen_tv(int rows, int cols, double eta_tv, double noise_var,
                  std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw InvalidConstants("gen_tv: need >= 2x2");
  if (!(eta_tv > 0.0)) throw InvalidConstants("gen_tv: eta_tv must be > 0");
  if (!(noise_var >= 0.0)) throw InvalidConstants("gen_tv: noise_var < 0");
  TvInstance inst;
  inst.rows = rows;
  inst.cols = cols;
  inst.n = rows * cols;
  inst.m = (inst.n + 2) / 3;  // ceil(n/3)
  inst.seed = seed;
  inst.eta_tv = eta_tv;
  inst.noise_var = noise_var;
  inst.x_true = tv_phantom(rows, cols);

  Rng rng_a(substream_seed(seed, "A"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(inst.m));
  inst.A = MatrixXd(inst.m, inst.n);
  for (int r = 0; r < inst.m; ++r) {
    for (int c = 0; c < inst.n; ++c) {
      inst.A(r, c) = rng_a.uniform01() < 0.5 ? -scale : scale;
    }
  }

  Rng rng_noise(substream_seed(seed, "noise"));
  const double sigma = std::sqrt(noise_var);
  inst.b = inst.A * inst.x_true;
  for (int i = 0; i < inst.m; ++i) inst.b[i] += sigma * rng_noise.normal();

  inst.L = estimate_lmax(
      [&](const VectorXd& v) {
        return VectorXd(inst.A.transpose() * (inst.A * v));
      },
      inst.n).value;
  inst.K_norm = eta_tv * std::sqrt(8.0);
  return inst;
}

LinearOperator tv_k_operator(const TvInstance& inst) {
  LinearOperator d = tv_diff_operator(inst.rows, inst.cols);
  LinearOperator k;
  k.rows = d.rows;
  k.cols = d.cols;
  k.norm_bound = inst.K_norm;
  const double eta = inst.eta_tv;
  k.apply = [d, eta](const VectorXd& x) { return VectorXd(eta * d.apply(x)); };
  k.apply_adjoint = [d, eta](const VectorXd& y) {
    return VectorXd(eta * d.apply_adjoint(y));
  };
  return k;
}

SmoothOracle tv_f(const TvInstance& inst, double ridge) {
  SmoothOracle f;
  const MatrixXd A = inst.A;
  const VectorXd b = inst.b;
  f.value = [A, b, ridge](const VectorXd& x) {
    const double fit = 0.5 * (A * x - b).squaredNorm();
    return ridge > 0.0 ? fit + 0.5 * ridge * x.squaredNorm() : fit;
  };
  f.gradient = [A, b, ridge](const VectorXd& x) {
    VectorXd g = A.transpose() * (A * x - b);
    if (ridge > 0.0) g += ridge * x;
    return g;
  };
  f.lipschitz = inst.L + ridge;
  f.strong_convexity = ridge;
  return f;
}

SaddleInstance tv_saddle(const TvInstance& inst, double ridge) {
  SaddleInstance s;
  s.f = tv_f(inst, ridge);
  s.K = tv_k_operator(inst);
  s.X = FeasibleSet::WholeSpace(inst.n);
  s.Y = FeasibleSet::GroupedUnitBalls(inst.n);
  s.dual_geom = BregmanGeometry::Euclidean();
  s.y0 = VectorXd::Zero(2 * inst.n);
  s.Omega = inst.n / 2.0;
  return s;
}

// ---- serialization ----

nlohmann::json to_json(const PortfolioInstance& inst) {
  json j;
  j["schema_version"] = 1;
  j["type"] = "portfolio";
  j["seed"] = inst.seed;
  j["n"] = inst.n;
  j["m"] = inst.m;
  j["target_ratio"] = inst.target_ratio;
  j["eta"] = inst.eta;
  j["L"] = inst.L;
  j["M"] = inst.M;
  j["b"] = vector_to_json(inst.b);
  j["A"] = matrix_to_json(inst.A);
  j["F"] = matrix_to_json(inst.F);
  j["D"] = matrix_to_json(inst.D);
  return j;
}

PortfolioInstance portfolio_from_json(const json& j) {
  PortfolioInstance inst;
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.n = j.at("n").get<int>();
  inst.m = j.at("m").get<int>();
  inst.target_ratio = j.at("target_ratio").get<double>();
  inst.eta = j.at("eta").get<double>();
  inst.L = j.at("L").get<double>();
  inst.M = j.at("M").get<double>();
  inst.b = vector_from_json(j.at("b"));
  inst.A = matrix_from_json(j.at("A"));
  inst.F = matrix_from_json(j.at("F"));
  inst.D = matrix_from_json(j.at("D"));
  return inst;
}

nlohmann::json to_json(const TvInstance& inst) {
  json j;
  j["schema_version"] = 1;
  j["type"] = "tv";
  j["seed"] = inst.seed;
  j["rows"] = inst.rows;
  j["cols"] = inst.cols;
  j["eta_tv"] = inst.eta_tv;
  j["noise_var"] = inst.noise_var;
  j["L"] = inst.L;
  j["K_norm"] = inst.K_norm;
  j["A"] = matrix_to_json(inst.A);
  j["b"] = vector_to_json(inst.b);
  j["x_true"] = vector_to_json(inst.x_true);
  return j;
}

TvInstance tv_from_json(const json& j) {
  TvInstance inst;
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.rows = j.at("rows").get<int>();
  inst.cols = j.at("cols").get<int>();
  inst.n = inst.rows * inst.cols;
  inst.eta_tv = j.at("eta_tv").get<double>();
  inst.noise_var = j.at("noise_var").get<double>();
  inst.L = j.at("L").get<double>();
  inst.K_norm = j.at("K_norm").get<double>();
  inst.A = matrix_from_json(j.at("A"));
  inst.m = static_cast<int>(inst.A.rows());
  inst.b = vector_from_json(j.at("b"));
  inst.x_true = vector_from_json(j.at("x_true"));
  return inst;
}

AnyInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_instance: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("load_instance: parse failure in " + path + ": " +
                  e.what());
  }
  const std::string type = j.value("type", "");
  if (type == "portfolio") return portfolio_from_json(j);
  if (type == "tv") return tv_from_json(j);
  throw IoError("load_instance: unknown instance type '" + type + "'");
}

void save_instance(const json& j, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("save_instance: cannot open " + tmp);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("save_instance: write failure on " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("save_instance: rename to " + path + " failed");
  }
}

}  // namespace ags
