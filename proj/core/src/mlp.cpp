#include "specnet/mlp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "specnet/errors.hpp"
#include "specnet/format.hpp"
#include "specnet/random.hpp"

namespace specnet {

MlpParams MlpParams::zeros_like() const {
  MlpParams out;
  out.sizes = sizes;
  for (const Matrix& w : weights) out.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const Vector& b : biases) out.biases.push_back(Vector::Zero(b.size()));
  return out;
}

void MlpParams::validate() const {
  if (sizes.size() < 2) throw InputError("network needs at least an input and output size");
  if (weights.size() != sizes.size() - 1 || biases.size() != weights.size()) {
    throw InputError("layer count does not match the size list");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (sizes[l] < 1 || weights[l].rows() != sizes[l + 1] || weights[l].cols() != sizes[l] ||
        biases[l].size() != sizes[l + 1]) {
      throw InputError("layer " + std::to_string(l) + " has inconsistent dimensions");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw InputError("layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
}

MlpParams init_mlp(const std::vector<Index>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw InputError("network needs at least an input and output size");
  Rng rng(seed);
  MlpParams p;
  p.sizes = sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] < 1 || sizes[l + 1] < 1) throw InputError("layer sizes must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(sizes[l]));
    Matrix w(sizes[l + 1], sizes[l]);
    for (Index i = 0; i < w.rows(); ++i) {
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(sizes[l + 1]));
  }
  return p;
}

namespace {

void check_input(const MlpParams& params, const Matrix& x) {
  if (x.cols() != params.input_dim()) {
    throw InputError("input dimension " + std::to_string(x.cols()) + " does not match " +
                     std::to_string(params.input_dim()));
  }
}

}  // namespace

Matrix mlp_forward(const MlpParams& params, const Matrix& x) {
  check_input(params, x);
  Matrix a = x;
  for (Index l = 0; l < params.layers(); ++l) {
    Matrix z = a * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    a = l + 1 < params.layers() ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return a;
}

MlpParams train_grad(const MlpParams& params, const Matrix& x, const Matrix& g) {
  check_input(params, x);
  if (g.rows() != x.rows() || g.cols() != params.output_dim()) {
    throw InputError("G must have the shape of the network output");
  }
  if (!g.allFinite()) throw InputError("G has non-finite entries");
  const Index layers = params.layers();
  // Keep pre-activations of hidden layers for the ReLU mask.
  std::vector<Matrix> acts{x};
  std::vector<Matrix> pre;
  for (Index l = 0; l < layers; ++l) {
    Matrix z = acts.back() * params.weights[l].transpose();
    z.rowwise() += params.biases[l].transpose();
    if (l + 1 < layers) {
      acts.push_back(z.cwiseMax(0.0));
      pre.push_back(std::move(z));
    }
  }
  MlpParams grads = params.zeros_like();
  Matrix delta = g;
  for (Index l = layers - 1; l >= 0; --l) {
    grads.weights[l].noalias() = delta.transpose() * acts[l];
    grads.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix back = delta * params.weights[l];
      delta = (pre[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return grads;
}

namespace {

void adam_block(Matrix& value, AdamMoments& mom, const Matrix& grad, double lr, double b1,
                double b2, double eps, std::int64_t step) {
  mom.m = b1 * mom.m + (1.0 - b1) * grad;
  mom.v = b2 * mom.v + (1.0 - b2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  value.array() -= lr * (mom.m.array() / c1) / ((mom.v.array() / c2).sqrt() + eps);
}

AdamMoments zero_moments(Index rows, Index cols) {
  return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
}

}  // namespace

AdamState AdamState::for_params(const MlpParams& params) {
  AdamState s;
  for (const Matrix& w : params.weights) s.weights.push_back(zero_moments(w.rows(), w.cols()));
  for (const Vector& b : params.biases) s.biases.push_back(zero_moments(b.size(), 1));
  return s;
}

void adam_update(MlpParams& params, AdamState& state, const MlpParams& grads, double lr) {
  if (!(lr >= 0.0)) throw InputError("learning rate must be nonnegative");
  if (state.weights.size() != params.weights.size()) state = AdamState::for_params(params);
  ++state.step;
  for (Index l = 0; l < params.layers(); ++l) {
    adam_block(params.weights[l], state.weights[l], grads.weights[l], lr, state.beta1,
               state.beta2, state.eps, state.step);
    Matrix b = params.biases[l];
    adam_block(b, state.biases[l], grads.biases[l], lr, state.beta1, state.beta2, state.eps,
               state.step);
    params.biases[l] = b;
  }
}

void MatrixAdam::update(Matrix& value, const Matrix& grad, double lr) {
  if (moments.m.rows() != value.rows() || moments.m.cols() != value.cols()) {
    moments = zero_moments(value.rows(), value.cols());
    step = 0;
  }
  ++step;
  adam_block(value, moments, grad, lr, beta1, beta2, eps, step);
}

void save_mlp(const MlpParams& params, const Matrix* xi, const std::filesystem::path& path) {
  params.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "layers " << params.layers() << '\n';
  for (std::size_t i = 0; i < params.sizes.size(); ++i) {
    out << (i ? " " : "") << params.sizes[i];
  }
  out << '\n';
  for (Index l = 0; l < params.layers(); ++l) {
    const Matrix& w = params.weights[l];
    for (Index i = 0; i < w.rows(); ++i) {
      for (Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << format_double(w(i, j));
      out << '\n';
    }
    for (Index i = 0; i < params.biases[l].size(); ++i) {
      out << (i ? " " : "") << format_double(params.biases[l][i]);
    }
    out << '\n';
  }
  if (xi) {
    out << "xi " << xi->rows() << '\n';
    for (Index i = 0; i < xi->rows(); ++i) {
      for (Index j = 0; j < xi->cols(); ++j) out << (j ? " " : "") << format_double((*xi)(i, j));
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

MlpParams load_mlp(const std::filesystem::path& path, Matrix* xi) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string token;
  long long token_no = 0;
  auto next = [&](const char* what) {
    if (!(in >> token)) {
      throw ParseError("token " + std::to_string(token_no) + ": expected " + what);
    }
    ++token_no;
    return token;
  };
  auto next_int = [&](const char* what) {
    long long v = 0;
    if (!parse_int(next(what), v)) {
      throw ParseError("token " + std::to_string(token_no) + ": expected integer " + what);
    }
    return v;
  };
  auto next_double = [&]() {
    double v = 0.0;
    if (!parse_double(next("value"), v)) {
      throw ParseError("token " + std::to_string(token_no) + ": expected a number");
    }
    return v;
  };
  if (next("'layers'") != "layers") throw ParseError("token 1: expected 'layers'");
  const long long layers = next_int("layer count");
  if (layers < 1) throw ParseError("layer count must be positive");
  MlpParams p;
  for (long long i = 0; i <= layers; ++i) p.sizes.push_back(next_int("layer size"));
  for (long long l = 0; l < layers; ++l) {
    Matrix w(p.sizes[l + 1], p.sizes[l]);
    for (Index i = 0; i < w.rows(); ++i) {
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = next_double();
    }
    Vector b(p.sizes[l + 1]);
    for (Index i = 0; i < b.size(); ++i) b[i] = next_double();
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  if (in >> token) {
    if (token != "xi") throw ParseError("unexpected trailing token '" + token + "'");
    const long long k = next_int("xi size");
    Matrix m(k, k);
    for (Index i = 0; i < k; ++i) {
      for (Index j = 0; j < k; ++j) m(i, j) = next_double();
    }
    if (xi) *xi = std::move(m);
  }
  p.validate();
  return p;
}

}  // namespace specnet
