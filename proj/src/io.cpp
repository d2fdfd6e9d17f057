#include "intact/io.hpp"

#include "intact/kernel.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace intact {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

double parse_number(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::out_of_range&) {
    // stod rejects subnormals; strtod handles them
    return std::strtod(tok.c_str(), nullptr);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, where + ": bad number '" + tok + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
}

Matrix read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    std::stringstream fields(t);
    std::string tok;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    while (std::getline(fields, tok, ',')) row.push_back(parse_number(trim(tok), where));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return a;
}

void write_matrix_csv(const fs::path& path, const Matrix& a, const std::string& header) {
  std::string text;
  if (!header.empty()) text += "# " + header + "\n";
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) text += ',';
      text += format_double(a(i, j));
    }
    text += '\n';
  }
  write_text(path, text);
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      std::size_t used = 0;
      labels.push_back(std::stoi(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": bad label '" + t + "'");
    }
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  std::string text = "# labels\n";
  for (int l : labels) text += std::to_string(l) + "\n";
  write_text(path, text);
}

// ---- model file ----------------------------------------------------------------

namespace {

void put_vector(std::string& out, const Vector& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) out += ' ' + format_double(v(j));
}

void put_matrix(std::string& out, char tag, std::size_t v, const Matrix& a) {
  out += "matrix ";
  out += tag;
  out += ' ' + std::to_string(v) + ' ' + std::to_string(a.rows()) + ' ' + std::to_string(a.cols()) + '\n';
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(a(i, j));
    }
    out += '\n';
  }
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::istringstream next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!trim(line).empty()) return std::istringstream(line);
    }
    fail("unexpected end of model file");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, "model line " + std::to_string(line_no_) + ": " + msg);
  }

  void expect(std::istringstream& line, const std::string& key) {
    std::string tok;
    if (!(line >> tok) || tok != key) fail("expected '" + key + "'");
  }

  template <class T>
  T value(std::istringstream& line) {
    std::string tok;
    if (!(line >> tok)) fail("missing value");
    if constexpr (std::is_same_v<T, double>) {
      return parse_number(tok, "model line " + std::to_string(line_no_));
    } else {
      std::istringstream conv(tok);
      T v{};
      if (!(conv >> v) || !conv.eof()) fail("bad integer '" + tok + "'");
      return v;
    }
  }

  Vector vector(std::istringstream& line, Eigen::Index size) {
    Vector v(size);
    for (Eigen::Index j = 0; j < size; ++j) v(j) = value<double>(line);
    return v;
  }

  Matrix matrix(char tag, std::size_t v, Eigen::Index rows, Eigen::Index cols) {
    auto head = next_line();
    expect(head, "matrix");
    std::string t;
    head >> t;
    if (t != std::string(1, tag)) fail(std::string("expected matrix ") + tag);
    if (value<std::size_t>(head) != v) fail("matrix index out of order");
    const auto r = value<Eigen::Index>(head);
    const auto c = value<Eigen::Index>(head);
    if (r != rows || c != cols) fail("matrix has unexpected shape");
    Matrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      auto line = next_line();
      for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = value<double>(line);
    }
    return a;
  }

 private:
  std::istringstream in_;
  long line_no_ = 0;
};

}  // namespace

std::string serialize_model(const IntactModel& model) {
  model.check();
  const auto& hp = model.hyperparams;
  const std::size_t m = model.m();
  const bool kernel = model.mode == ModelMode::Kernel;
  std::vector<Eigen::Index> dims;
  for (std::size_t v = 0; v < m; ++v)
    dims.push_back(kernel ? model.kernel_part->training_views[v].cols() : model.W[v].rows());

  std::string out = "intact-model 1\n";
  out += std::string("mode ") + (kernel ? "kernel" : "linear") + "\n";
  out += "views " + std::to_string(m) + "\n";
  out += "dims";
  for (auto dv : dims) out += ' ' + std::to_string(dv);
  out += "\nlatent " + std::to_string(hp.d) + "\n";
  out += "n_train " + std::to_string(kernel ? model.kernel_part->training_views.front().rows() : 0) + "\n";
  out += "hyper " + format_double(hp.c) + ' ' + format_double(hp.C1) + ' ' + format_double(hp.C2) + ' ' +
         std::to_string(hp.max_outer) + ' ' + std::to_string(hp.max_inner) + ' ' + format_double(hp.tol_obj) + ' ' +
         format_double(hp.tol_x) + ' ' + std::to_string(hp.seed) + "\n";
  out += std::string("standardization ") + (model.standardization ? "1" : "0") + "\n";
  if (model.standardization) {
    for (std::size_t v = 0; v < m; ++v) {
      out += "mean " + std::to_string(v);
      put_vector(out, model.standardization->mean[v]);
      out += "\nscale " + std::to_string(v);
      put_vector(out, model.standardization->scale[v]);
      out += '\n';
    }
  }
  if (kernel) {
    const auto& kp = *model.kernel_part;
    for (std::size_t v = 0; v < m; ++v)
      out += "kernel " + std::to_string(v) + (kp.kernels[v].kind == KernelSpec::Kind::Rbf ? " rbf " : " linear ") +
             format_double(kp.kernels[v].gamma) + "\n";
    for (std::size_t v = 0; v < m; ++v) put_matrix(out, 'A', v, kp.atoms[v]);
    for (std::size_t v = 0; v < m; ++v) put_matrix(out, 'Z', v, kp.training_views[v]);
  } else {
    for (std::size_t v = 0; v < m; ++v) put_matrix(out, 'W', v, model.W[v]);
  }
  out += "end\n";
  return out;
}

IntactModel parse_model(const std::string& text) {
  Reader r(text);
  IntactModel model;
  {
    auto l = r.next_line();
    r.expect(l, "intact-model");
    if (r.value<int>(l) != 1) r.fail("unsupported model format version");
  }
  {
    auto l = r.next_line();
    r.expect(l, "mode");
    std::string mode;
    l >> mode;
    if (mode == "linear") model.mode = ModelMode::Linear;
    else if (mode == "kernel") model.mode = ModelMode::Kernel;
    else r.fail("unknown mode '" + mode + "'");
  }
  auto l = r.next_line();
  r.expect(l, "views");
  const auto m = r.value<std::size_t>(l);
  if (m == 0) r.fail("model needs at least one view");
  l = r.next_line();
  r.expect(l, "dims");
  std::vector<Eigen::Index> dims;
  for (std::size_t v = 0; v < m; ++v) dims.push_back(r.value<Eigen::Index>(l));
  l = r.next_line();
  r.expect(l, "latent");
  const int d = r.value<int>(l);
  l = r.next_line();
  r.expect(l, "n_train");
  const auto n_train = r.value<Eigen::Index>(l);

  l = r.next_line();
  r.expect(l, "hyper");
  auto& hp = model.hyperparams;
  hp.c = r.value<double>(l);
  hp.C1 = r.value<double>(l);
  hp.C2 = r.value<double>(l);
  hp.max_outer = r.value<int>(l);
  hp.max_inner = r.value<int>(l);
  hp.tol_obj = r.value<double>(l);
  hp.tol_x = r.value<double>(l);
  hp.seed = r.value<std::uint64_t>(l);
  hp.d = d;
  try {
    hp.validate();
  } catch (const Error& e) {
    r.fail(e.what());
  }

  l = r.next_line();
  r.expect(l, "standardization");
  if (r.value<int>(l) == 1) {
    Standardization s;
    for (std::size_t v = 0; v < m; ++v) {
      l = r.next_line();
      r.expect(l, "mean");
      if (r.value<std::size_t>(l) != v) r.fail("mean index out of order");
      s.mean.push_back(r.vector(l, dims[v]));
      l = r.next_line();
      r.expect(l, "scale");
      if (r.value<std::size_t>(l) != v) r.fail("scale index out of order");
      s.scale.push_back(r.vector(l, dims[v]));
    }
    model.standardization = std::move(s);
  }

  if (model.mode == ModelMode::Kernel) {
    if (n_train < 1) r.fail("kernel model needs n_train >= 1");
    KernelModel km;
    for (std::size_t v = 0; v < m; ++v) {
      l = r.next_line();
      r.expect(l, "kernel");
      if (r.value<std::size_t>(l) != v) r.fail("kernel index out of order");
      std::string kind;
      l >> kind;
      const double gamma = r.value<double>(l);
      if (kind == "linear") km.kernels.push_back(KernelSpec::linear());
      else if (kind == "rbf") km.kernels.push_back(KernelSpec::rbf(gamma));
      else r.fail("unknown kernel '" + kind + "'");
    }
    for (std::size_t v = 0; v < m; ++v) km.atoms.push_back(r.matrix('A', v, n_train, d));
    for (std::size_t v = 0; v < m; ++v) km.training_views.push_back(r.matrix('Z', v, n_train, dims[v]));
    for (std::size_t v = 0; v < m; ++v) km.grams.push_back(enforce_psd(gram(km.training_views[v], km.kernels[v])));
    model.kernel_part = std::move(km);
  } else {
    for (std::size_t v = 0; v < m; ++v) model.W.push_back(r.matrix('W', v, dims[v], d));
  }
  l = r.next_line();
  r.expect(l, "end");
  model.check();
  return model;
}

void save_model(const fs::path& path, const IntactModel& model) { write_text(path, serialize_model(model)); }

IntactModel load_model(const fs::path& path) { return parse_model(read_text(path)); }

void write_history_csv(const fs::path& path, const FitHistory& history) {
  std::string text = "# converged " + std::string(history.converged ? "1" : "0") + " stop_reason " +
                     to_string(history.stop_reason) + "\nstep,kind,objective\n";
  text += "0,init," + format_double(history.initial_objective) + "\n";
  for (std::size_t k = 0; k < history.objective_trace.size(); ++k)
    text += std::to_string(k + 1) + ',' + to_string(history.objective_trace[k].kind) + ',' +
            format_double(history.objective_trace[k].objective) + "\n";
  write_text(path, text);
}

}  // namespace intact
