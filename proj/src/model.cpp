#include "spar/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "spar/io.hpp"

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts are not supported");

namespace spar {

namespace {

constexpr char kMagic[] = "SPAR-MODEL v1";
constexpr double kXiBranchSwitch = 1e-6;

void append_doubles(std::string& buf, const double* data, std::size_t count) {
  const std::size_t old = buf.size();
  buf.resize(old + count * sizeof(double));
  std::memcpy(buf.data() + old, data, count * sizeof(double));
}

void append_matrix(std::string& buf, const Eigen::MatrixXd& m) {
  // row-major on disk
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Eigen::VectorXd row = m.row(i);
    append_doubles(buf, row.data(), static_cast<std::size_t>(row.size()));
  }
}

void append_params(std::string& buf, const MlpParams& p) {
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    append_matrix(buf, p.weights[l]);
    append_doubles(buf, p.biases[l].data(), static_cast<std::size_t>(p.biases[l].size()));
  }
}

class BinaryReader {
public:
  BinaryReader(const char* data, std::size_t size) : data_(data), size_(size) {}

  double read_double() {
    if (pos_ + sizeof(double) > size_) throw std::runtime_error("model file truncated");
    double v;
    std::memcpy(&v, data_ + pos_, sizeof(double));
    pos_ += sizeof(double);
    return v;
  }

  Eigen::MatrixXd read_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = read_double();
    }
    return m;
  }

  Eigen::VectorXd read_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = read_double();
    return v;
  }

  bool exhausted() const { return pos_ == size_; }

private:
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::string arch_line(const MlpArchitecture& arch) {
  std::ostringstream os;
  os << arch.input_dim;
  for (int h : arch.hidden_widths) os << ' ' << h;
  os << ' ' << arch.output_dim;
  return os.str();
}

MlpArchitecture parse_arch(const std::string& line) {
  std::istringstream is(line);
  std::vector<int> widths;
  int w;
  while (is >> w) widths.push_back(w);
  if (widths.size() < 3) throw std::runtime_error("model file: bad architecture line");
  MlpArchitecture arch;
  arch.input_dim = widths.front();
  arch.output_dim = widths.back();
  arch.hidden_widths.assign(widths.begin() + 1, widths.end() - 1);
  return arch;
}

MlpParams read_params(BinaryReader& r, const MlpArchitecture& arch) {
  MlpParams p;
  std::vector<int> widths;
  widths.push_back(arch.input_dim);
  widths.insert(widths.end(), arch.hidden_widths.begin(), arch.hidden_widths.end());
  widths.push_back(arch.output_dim);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    p.weights.push_back(r.read_matrix(widths[l + 1], widths[l]));
    p.biases.push_back(r.read_vector(widths[l + 1]));
  }
  return p;
}

}  // namespace

double log_joint_density(const SparModel& model, const Eigen::VectorXd& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw std::invalid_argument("log_joint_density: zero point has no angle");
  const Eigen::VectorXd w = x / r;
  const RadialParams rp = predict_radial(model.threshold, model.gp, w);
  if (r <= rp.u) {
    throw BelowThresholdError("log_joint_density: point lies at or below the threshold surface");
  }
  const double d = static_cast<double>(model.dim());
  const double log_gp = -gp_nll(r - rp.u, rp.nu, rp.xi).value;
  return std::log(model.zeta) + (1.0 - d) * std::log(r) + kde_log_density(w, model.kde) + log_gp;
}

double contour_radius(const SparModel& model, const Eigen::VectorXd& w, double beta) {
  if (!(beta > 0.0) || beta > model.zeta) {
    throw std::invalid_argument("contour_radius: beta must be in (0, zeta]");
  }
  const RadialParams rp = predict_radial(model.threshold, model.gp, w);
  if (std::abs(rp.xi) < kXiBranchSwitch) {
    return rp.u + rp.sigma * std::log(model.zeta / beta);
  }
  return rp.u + rp.sigma / rp.xi * (std::pow(beta / model.zeta, -rp.xi) - 1.0);
}

ContourCloud contour_cloud(const SparModel& model, const SphereGrid& grid, double beta) {
  ContourCloud cloud;
  const Eigen::Index p = grid.size();
  cloud.points.resize(p, grid.d);
  cloud.angular_density.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::VectorXd w = grid.directions.row(i);
    cloud.points.row(i) = contour_radius(model, w, beta) * w.transpose();
    cloud.angular_density[i] = std::exp(kde_log_density(w, model.kde));
  }
  return cloud;
}

Eigen::MatrixXd simulate(const SparModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  const int d = model.dim();
  const std::size_t n_tail =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(model.zeta * static_cast<double>(n))));
  const std::size_t n_body = n - n_tail;
  if (n_body > 0 && model.body_pool.rows() == 0) {
    throw std::runtime_error("simulate: body pool is empty but zeta < 1");
  }

  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);

  // Tail: KDE angle, then GP inversion radius above the threshold there.
  Eigen::MatrixXd tail_angles(static_cast<Eigen::Index>(n_tail), d);
  for (std::size_t i = 0; i < n_tail; ++i) {
    tail_angles.row(static_cast<Eigen::Index>(i)) = sample_kde_one(model.kde, rng);
  }
  const Eigen::VectorXd u = n_tail > 0 ? threshold_at(model.threshold, tail_angles)
                                       : Eigen::VectorXd();
  const GpParamsBatch gp =
      n_tail > 0 ? gp_params_at(model.gp, tail_angles) : GpParamsBatch{};
  for (std::size_t i = 0; i < n_tail; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double z = gp_inverse_survival(rng.uniform_pos(), gp.sigma[k], gp.xi[k]);
    out.row(k) = (u[k] + z) * tail_angles.row(k);
  }

  for (std::size_t i = 0; i < n_body; ++i) {
    const std::size_t j = rng.uniform_index(static_cast<std::size_t>(model.body_pool.rows()));
    out.row(static_cast<Eigen::Index>(n_tail + i)) = model.body_pool.row(static_cast<Eigen::Index>(j));
  }
  return out;
}

SparModel fit_spar(const Eigen::MatrixXd& data, const FitOptions& options,
                   const PreprocessSpec& preprocess, FitReport* report) {
  if (!(options.zeta > 0.0 && options.zeta < 1.0)) {
    throw std::invalid_argument("fit_spar: zeta must be in (0,1)");
  }
  const int d = static_cast<int>(data.cols());
  const PolarSample polar = to_polar(data);

  const std::size_t m_pred = std::min<std::size_t>(options.m_pred, static_cast<std::size_t>(polar.size()));
  const BandwidthResult bw = optimize_bandwidth(polar.angles, options.kappa_grid, m_pred,
                                                options.k_exclude, Rng::derive_seed(options.seed, 1));

  SparModel model;
  model.zeta = options.zeta;
  model.preprocess = preprocess;
  model.kde = KdeModel(polar.angles, bw.kappa_star);

  MlpArchitecture threshold_arch{d, options.hidden_widths, 1};
  MlpArchitecture gp_arch{d, options.hidden_widths, 2};
  TrainConfig tc = options.train;
  tc.seed = Rng::derive_seed(options.seed, 2);
  model.threshold = fit_threshold(polar.angles, polar.radii, options.zeta, threshold_arch, tc);

  const ExceedanceSet exceed = exceedance_set(polar.angles, polar.radii, model.threshold);
  Eigen::MatrixXd exceed_angles(static_cast<Eigen::Index>(exceed.indices.size()), d);
  for (std::size_t i = 0; i < exceed.indices.size(); ++i) {
    exceed_angles.row(static_cast<Eigen::Index>(i)) = polar.angles.row(exceed.indices[i]);
  }
  tc.seed = Rng::derive_seed(options.seed, 3);
  model.gp = fit_gp(exceed_angles, exceed.excesses, gp_arch, tc);

  std::vector<char> is_exceed(static_cast<std::size_t>(polar.size()), 0);
  for (Eigen::Index idx : exceed.indices) is_exceed[static_cast<std::size_t>(idx)] = 1;
  model.body_pool.resize(polar.size() - static_cast<Eigen::Index>(exceed.indices.size()), d);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < polar.size(); ++i) {
    if (!is_exceed[static_cast<std::size_t>(i)]) model.body_pool.row(row++) = data.row(i);
  }

  if (report != nullptr) {
    report->bandwidth = bw;
    report->n_exceed = exceed.indices.size();
    report->exceed_fraction = model.threshold.exceed_fraction;
    report->threshold_calibration_ok = model.threshold.calibration_ok;
    report->threshold_degraded = model.threshold.degraded;
    report->gp_degraded = model.gp.degraded;
  }
  return model;
}

void save(const SparModel& model, const std::filesystem::path& path) {
  std::ostringstream header;
  header << kMagic << '\n';
  header << "dim " << model.dim() << '\n';
  header << "kde_n " << model.kde.size() << '\n';
  header << "threshold_arch " << arch_line(model.threshold.arch) << '\n';
  header << "gp_arch " << arch_line(model.gp.arch) << '\n';
  header << "body_rows " << model.body_pool.rows() << '\n';
  header << "flags " << (model.threshold.calibration_ok ? 1 : 0) << ' '
         << (model.threshold.degraded ? 1 : 0) << ' ' << (model.gp.degraded ? 1 : 0) << '\n';
  header << "preprocess " << model.preprocess.recipe << ' ' << model.preprocess.columns.size()
         << '\n';
  for (const auto& col : model.preprocess.columns) {
    header << "col " << std::quoted(col.name) << ' ' << std::quoted(col.role) << ' '
           << std::quoted(col.source) << '\n';
  }
  header << "binary\n";

  std::string buf = header.str();
  const double scalars[3] = {model.zeta, model.kde.kappa, model.threshold.exceed_fraction};
  append_doubles(buf, scalars, 3);
  append_matrix(buf, model.kde.angles);
  append_params(buf, model.threshold.mlp);
  append_params(buf, model.gp.mlp);
  append_matrix(buf, model.body_pool);
  for (const auto& col : model.preprocess.columns) {
    append_doubles(buf, &col.scale, 1);
    append_doubles(buf, &col.offset, 1);
  }
  write_file_atomic(path, buf);
}

SparModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::istringstream is(content);
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(is, line)) throw std::runtime_error("model file truncated: " + path.string());
    return line;
  };
  if (next_line() != kMagic) {
    throw std::runtime_error("not a SPAR model file (or unsupported version): " + path.string());
  }

  auto expect_key = [&](const std::string& key) {
    next_line();
    if (line.rfind(key + ' ', 0) != 0) {
      throw std::runtime_error("model file: expected '" + key + "' line");
    }
    return line.substr(key.size() + 1);
  };

  SparModel model;
  const long dim = parse_long(expect_key("dim"));
  const long kde_n = parse_long(expect_key("kde_n"));
  const MlpArchitecture threshold_arch = parse_arch(expect_key("threshold_arch"));
  const MlpArchitecture gp_arch = parse_arch(expect_key("gp_arch"));
  const long body_rows = parse_long(expect_key("body_rows"));
  {
    std::istringstream fs(expect_key("flags"));
    int cal = 1, tdeg = 0, gdeg = 0;
    fs >> cal >> tdeg >> gdeg;
    model.threshold.calibration_ok = cal != 0;
    model.threshold.degraded = tdeg != 0;
    model.gp.degraded = gdeg != 0;
  }
  {
    std::istringstream ps(expect_key("preprocess"));
    std::size_t ncols = 0;
    ps >> model.preprocess.recipe >> ncols;
    for (std::size_t i = 0; i < ncols; ++i) {
      next_line();
      std::istringstream cs(line);
      std::string tag;
      ColumnSpec col;
      cs >> tag >> std::quoted(col.name) >> std::quoted(col.role) >> std::quoted(col.source);
      if (tag != "col" || !cs) throw std::runtime_error("model file: bad column line");
      model.preprocess.columns.push_back(std::move(col));
    }
  }
  if (next_line() != "binary") throw std::runtime_error("model file: missing binary marker");

  const std::size_t offset = static_cast<std::size_t>(is.tellg());
  BinaryReader reader(content.data() + offset, content.size() - offset);
  model.zeta = reader.read_double();
  const double kappa = reader.read_double();
  model.threshold.exceed_fraction = reader.read_double();
  model.kde = KdeModel(reader.read_matrix(kde_n, dim), kappa);
  model.threshold.arch = threshold_arch;
  model.threshold.mlp = read_params(reader, threshold_arch);
  model.threshold.zeta = model.zeta;
  model.gp.arch = gp_arch;
  model.gp.mlp = read_params(reader, gp_arch);
  model.body_pool = reader.read_matrix(body_rows, dim);
  for (auto& col : model.preprocess.columns) {
    col.scale = reader.read_double();
    col.offset = reader.read_double();
  }
  if (!reader.exhausted()) throw std::runtime_error("model file: trailing bytes");
  return model;
}

}  // namespace spar
