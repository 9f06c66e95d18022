#include "nck/io.hpp"

#include <charconv>
#include <sstream>

namespace nck {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

void write_doubles(std::ostream& out, const Scalar* data, size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(Scalar)));
}

void read_doubles(std::istream& in, Scalar* data, size_t count) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(Scalar)));
  if (!in) throw std::runtime_error("truncated binary block");
}

}  // namespace

std::string format_scalar(Scalar v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_particles(const std::string& path, const Eigen::Ref<const Matrix>& x,
                     Index level, Scalar sigma) {
  validate_particles(x, "write_particles");
  auto out = open_out(path, std::ios::binary);
  out << x.rows() << ' ' << x.cols() << ' ' << level << ' ' << format_scalar(sigma) << '\n';
  // Row-major so each particle is contiguous on disk.
  std::vector<Scalar> row(static_cast<size_t>(x.cols()));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) row[static_cast<size_t>(j)] = x(i, j);
    write_doubles(out, row.data(), row.size());
  }
  if (!out) throw std::runtime_error("failed writing particle file: " + path);
}

ParticleFile read_particles(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("missing particle header: " + path);
  std::istringstream hs(header);
  Index n = 0, d = 0;
  ParticleFile file;
  if (!(hs >> n >> d >> file.level >> file.sigma))
    throw std::runtime_error("malformed particle header: " + path);
  if (n < 1 || d < 1) throw std::runtime_error("invalid particle shape: " + path);
  file.particles.resize(n, d);
  std::vector<Scalar> row(static_cast<size_t>(d));
  for (Index i = 0; i < n; ++i) {
    read_doubles(in, row.data(), row.size());
    for (Index j = 0; j < d; ++j) file.particles(i, j) = row[static_cast<size_t>(j)];
  }
  validate_particles(file.particles, "read_particles");
  return file;
}

void save_checkpoint(const std::string& path, const ConditionedNet& net) {
  auto out = open_out(path, std::ios::binary);
  const auto& cond = net.conditioning();
  out << "conditioned-net " << net.net().depth() << ' '
      << (cond.method == ConditioningMethod::kConcatLogSigma ? "concat_log_sigma" : "none")
      << ' '
      << (cond.normalization == OutputScale::kInvSigma ? "inv_sigma" : "none") << '\n';
  for (const auto& layer : net.net().layers()) {
    out << "layer " << layer.weight.cols() << ' ' << layer.weight.rows() << ' '
        << to_string(layer.act) << '\n';
  }
  const Vector params = net.net().params();
  out << "params " << params.size() << '\n';
  write_doubles(out, params.data(), static_cast<size_t>(params.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

ConditionedNet load_checkpoint(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("missing checkpoint header: " + path);
  std::istringstream hs(line);
  std::string tag, method, norm;
  Index depth = 0;
  if (!(hs >> tag >> depth >> method >> norm) || tag != "conditioned-net" || depth < 1)
    throw std::runtime_error("malformed checkpoint header: " + path);

  NoiseConditioning cond;
  if (method == "concat_log_sigma") cond.method = ConditioningMethod::kConcatLogSigma;
  else if (method == "none") cond.method = ConditioningMethod::kNone;
  else throw std::runtime_error("unknown conditioning method in checkpoint: " + method);
  if (norm == "inv_sigma") cond.normalization = OutputScale::kInvSigma;
  else if (norm == "none") cond.normalization = OutputScale::kNone;
  else throw std::runtime_error("unknown normalization in checkpoint: " + norm);

  std::vector<Layer> layers;
  for (Index l = 0; l < depth; ++l) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated checkpoint: " + path);
    std::istringstream ls(line);
    std::string ltag, act;
    Index in_dim = 0, out_dim = 0;
    if (!(ls >> ltag >> in_dim >> out_dim >> act) || ltag != "layer" || in_dim < 1 || out_dim < 1)
      throw std::runtime_error("malformed layer line in checkpoint: " + path);
    Layer layer;
    layer.weight = Matrix::Zero(out_dim, in_dim);
    layer.bias = Vector::Zero(out_dim);
    layer.act = activation_from_string(act);
    layers.push_back(std::move(layer));
  }
  if (!std::getline(in, line)) throw std::runtime_error("truncated checkpoint: " + path);
  std::istringstream ps(line);
  std::string ptag;
  Index count = 0;
  if (!(ps >> ptag >> count) || ptag != "params")
    throw std::runtime_error("malformed params line in checkpoint: " + path);

  FeedforwardNet net(std::move(layers));
  require(count == net.param_count(), "checkpoint parameter count mismatch");
  Vector params(count);
  read_doubles(in, params.data(), static_cast<size_t>(count));
  net.set_params(params);
  return ConditionedNet(std::move(net), cond);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(open_out(path, std::ios::out)), columns_(columns.size()) {
  require(!columns.empty(), "CsvWriter: need at least one column");
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  require(cells.size() == columns_, "CsvWriter: cell count does not match header");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("CsvWriter: write failed");
}

std::string CsvWriter::num(Scalar v) { return format_scalar(v); }

std::string CsvWriter::num(Index v) { return std::to_string(v); }

}  // namespace nck
