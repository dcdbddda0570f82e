#include "rdp/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rdp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int wrap(int i, int n) {
  const int m = i % n;
  return m < 0 ? m + n : m;
}

void require_dim(const Vector& v, Eigen::Index n, const char* what) {
  require(v.size() == n, "dimension_mismatch",
          std::string(what) + ": expected length " + std::to_string(n) + ", got " + std::to_string(v.size()));
}

// Unitary DFT rows: M_kn = exp(-2 pi i k n / n_full) / sqrt(n_full), k < n_rows.
ComplexMatrix dft_rows(int n_rows, int n_full) {
  ComplexMatrix m(n_rows, n_full);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_full));
  for (int k = 0; k < n_rows; ++k) {
    for (int n = 0; n < n_full; ++n) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(k) * n) % n_full) / n_full;
      m(k, n) = std::polar(scale, angle);
    }
  }
  return m;
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> as_grid(const Vector& x,
                                                                                                GridShape s) {
  return {x.data(), s.rows, s.cols};
}

}  // namespace

ForwardModel ForwardModel::dense_linear(Matrix a) {
  require(a.rows() > 0 && a.cols() > 0, "invalid_forward_model", "dense operator must be non-empty");
  require(a.allFinite(), "invalid_forward_model", "dense operator has non-finite entries");
  return ForwardModel(DenseLinearOp{std::move(a)});
}

ForwardModel ForwardModel::mask(const std::vector<int>& binary_mask) {
  MaskOp op;
  op.input_dim = static_cast<Eigen::Index>(binary_mask.size());
  for (std::size_t i = 0; i < binary_mask.size(); ++i) {
    require(binary_mask[i] == 0 || binary_mask[i] == 1, "invalid_forward_model", "mask entries must be 0 or 1");
    if (binary_mask[i] == 1) op.observed.push_back(static_cast<Eigen::Index>(i));
  }
  require(!op.observed.empty(), "invalid_forward_model", "mask observes no entries");
  return ForwardModel(std::move(op));
}

ForwardModel ForwardModel::circular_conv(Matrix kernel, GridShape shape) {
  require(shape.rows > 0 && shape.cols > 0, "invalid_forward_model", "grid shape must be positive");
  require(kernel.rows() > 0 && kernel.cols() > 0 && kernel.allFinite(), "invalid_forward_model",
          "kernel must be non-empty and finite");
  CircularConvOp op;
  op.shape = shape;
  op.wrapped = Matrix::Zero(shape.rows, shape.cols);
  const int cr = static_cast<int>(kernel.rows()) / 2;
  const int cc = static_cast<int>(kernel.cols()) / 2;
  for (int a = 0; a < kernel.rows(); ++a) {
    for (int b = 0; b < kernel.cols(); ++b) {
      op.wrapped(wrap(a - cr, shape.rows), wrap(b - cc, shape.cols)) += kernel(a, b);
    }
  }
  op.kernel = std::move(kernel);
  return ForwardModel(std::move(op));
}

ForwardModel ForwardModel::linear_scattering(Matrix h, Vector u_in) {
  require(h.cols() == u_in.size(), "invalid_forward_model", "propagator columns must match incident field length");
  require(h.rows() > 0 && h.allFinite() && u_in.allFinite(), "invalid_forward_model",
          "scattering operator must be non-empty and finite");
  return ForwardModel(LinearScatteringOp{std::move(h), std::move(u_in)});
}

ForwardModel ForwardModel::phase_retrieval(GridShape shape, double eps_mag) {
  require(shape.rows > 0 && shape.cols > 0, "invalid_forward_model", "grid shape must be positive");
  require(eps_mag > 0.0, "invalid_forward_model", "eps_mag must be positive");
  PhaseRetrievalOp op;
  op.shape = shape;
  op.eps_mag = eps_mag;
  op.row_dft = dft_rows(shape.rows, shape.rows);
  op.half_dft = dft_rows(shape.cols / 2 + 1, shape.cols);
  return ForwardModel(std::move(op));
}

Eigen::Index ForwardModel::input_dim() const {
  return std::visit(Overloaded{
                        [](const DenseLinearOp& o) { return o.a.cols(); },
                        [](const MaskOp& o) { return o.input_dim; },
                        [](const CircularConvOp& o) { return Eigen::Index{o.shape.size()}; },
                        [](const LinearScatteringOp& o) { return o.h.cols(); },
                        [](const PhaseRetrievalOp& o) { return Eigen::Index{o.shape.size()}; },
                    },
                    op_);
}

Eigen::Index ForwardModel::output_dim() const {
  return std::visit(Overloaded{
                        [](const DenseLinearOp& o) { return o.a.rows(); },
                        [](const MaskOp& o) { return static_cast<Eigen::Index>(o.observed.size()); },
                        [](const CircularConvOp& o) { return Eigen::Index{o.shape.size()}; },
                        [](const LinearScatteringOp& o) { return o.h.rows(); },
                        [](const PhaseRetrievalOp& o) {
                          return Eigen::Index{o.shape.rows * (o.shape.cols / 2 + 1)};
                        },
                    },
                    op_);
}

bool ForwardModel::is_linear() const { return !std::holds_alternative<PhaseRetrievalOp>(op_); }

std::string_view ForwardModel::kind() const {
  return std::visit(Overloaded{
                        [](const DenseLinearOp&) { return std::string_view("dense_linear"); },
                        [](const MaskOp&) { return std::string_view("mask"); },
                        [](const CircularConvOp&) { return std::string_view("circular_conv"); },
                        [](const LinearScatteringOp&) { return std::string_view("linear_scattering"); },
                        [](const PhaseRetrievalOp&) { return std::string_view("phase_retrieval"); },
                    },
                    op_);
}

Vector ForwardModel::apply(const Vector& x) const {
  require_dim(x, input_dim(), "forward apply");
  return std::visit(
      Overloaded{
          [&](const DenseLinearOp& o) -> Vector { return o.a * x; },
          [&](const MaskOp& o) -> Vector {
            Vector y(static_cast<Eigen::Index>(o.observed.size()));
            for (std::size_t k = 0; k < o.observed.size(); ++k) y(static_cast<Eigen::Index>(k)) = x(o.observed[k]);
            return y;
          },
          [&](const CircularConvOp& o) -> Vector {
            const int R = o.shape.rows, C = o.shape.cols;
            Vector y = Vector::Zero(R * C);
            for (int u = 0; u < R; ++u) {
              for (int v = 0; v < C; ++v) {
                const double k = o.wrapped(u, v);
                if (k == 0.0) continue;
                for (int i = 0; i < R; ++i) {
                  const int si = wrap(i - u, R);
                  for (int j = 0; j < C; ++j) y(i * C + j) += k * x(si * C + wrap(j - v, C));
                }
              }
            }
            return y;
          },
          [&](const LinearScatteringOp& o) -> Vector { return o.h * o.u_in.cwiseProduct(x); },
          [&](const PhaseRetrievalOp& o) -> Vector {
            const ComplexMatrix z = o.row_dft * as_grid(x, o.shape).cast<std::complex<double>>() * o.half_dft.transpose();
            Vector y(z.size());
            for (Eigen::Index r = 0; r < z.rows(); ++r)
              for (Eigen::Index c = 0; c < z.cols(); ++c) y(r * z.cols() + c) = std::abs(z(r, c));
            return y;
          },
      },
      op_);
}

Vector ForwardModel::vjp(const Vector& x, const Vector& v) const {
  require_dim(x, input_dim(), "forward vjp (x)");
  require_dim(v, output_dim(), "forward vjp (v)");
  return std::visit(
      Overloaded{
          [&](const DenseLinearOp& o) -> Vector { return o.a.transpose() * v; },
          [&](const MaskOp& o) -> Vector {
            Vector g = Vector::Zero(o.input_dim);
            for (std::size_t k = 0; k < o.observed.size(); ++k) g(o.observed[k]) = v(static_cast<Eigen::Index>(k));
            return g;
          },
          [&](const CircularConvOp& o) -> Vector {
            const int R = o.shape.rows, C = o.shape.cols;
            Vector g = Vector::Zero(R * C);
            for (int u = 0; u < R; ++u) {
              for (int w = 0; w < C; ++w) {
                const double k = o.wrapped(u, w);
                if (k == 0.0) continue;
                for (int p = 0; p < R; ++p) {
                  const int sp = wrap(p + u, R);
                  for (int q = 0; q < C; ++q) g(p * C + q) += k * v(sp * C + wrap(q + w, C));
                }
              }
            }
            return g;
          },
          [&](const LinearScatteringOp& o) -> Vector { return o.u_in.cwiseProduct(o.h.transpose() * v); },
          [&](const PhaseRetrievalOp& o) -> Vector {
            const ComplexMatrix z = o.row_dft * as_grid(x, o.shape).cast<std::complex<double>>() * o.half_dft.transpose();
            ComplexMatrix u = ComplexMatrix::Zero(z.rows(), z.cols());
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
              for (Eigen::Index c = 0; c < z.cols(); ++c) {
                const double mag = std::abs(z(r, c));
                if (mag >= o.eps_mag) u(r, c) = v(r * z.cols() + c) * z(r, c) / mag;
              }
            }
            const Matrix g = (o.row_dft.adjoint() * u * o.half_dft.conjugate()).real();
            Vector out(g.size());
            for (Eigen::Index r = 0; r < g.rows(); ++r)
              for (Eigen::Index c = 0; c < g.cols(); ++c) out(r * g.cols() + c) = g(r, c);
            return out;
          },
      },
      op_);
}

Matrix ForwardModel::dense_matrix() const {
  require(is_linear(), "nonlinear_operator", std::string(kind()) + " has no matrix representation");
  if (const auto* d = std::get_if<DenseLinearOp>(&op_)) return d->a;
  if (const auto* s = std::get_if<LinearScatteringOp>(&op_)) return s->h * s->u_in.asDiagonal();
  const Eigen::Index n = input_dim();
  Matrix a(output_dim(), n);
  Vector e = Vector::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e(j) = 1.0;
    a.col(j) = apply(e);
    e(j) = 0.0;
  }
  return a;
}

Svd ForwardModel::svd() const {
  const Matrix a = dense_matrix();
  Eigen::BDCSVD<Matrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

Matrix make_gaussian_blur_kernel(double sigma_blur, int size) {
  require(sigma_blur > 0.0, "invalid_forward_model", "blur sigma must be positive");
  require(size > 0 && size % 2 == 1, "invalid_forward_model", "kernel size must be a positive odd integer");
  Matrix k(size, size);
  const int c = size / 2;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      k(i, j) = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2.0 * sigma_blur * sigma_blur));
  return k / k.sum();
}

Matrix make_scattering_propagator(GridShape shape, double decay, int n_receivers, Rng& rng) {
  require(decay > 0.0, "invalid_forward_model", "propagator decay must be positive");
  require(n_receivers > 0 && shape.size() > 0, "invalid_forward_model", "receivers and grid must be non-empty");
  const int d = shape.size();
  const double c = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix h(n_receivers, d);
  for (int i = 0; i < n_receivers; ++i) {
    const double qr = rng.uniform() * (shape.rows - 1);
    const double qc = rng.uniform() * (shape.cols - 1);
    for (int r = 0; r < shape.rows; ++r) {
      for (int col = 0; col < shape.cols; ++col) {
        const double dist = std::hypot(qr - r, qc - col);
        h(i, r * shape.cols + col) = c / (1.0 + dist / decay);
      }
    }
  }
  return h;
}

std::vector<int> make_random_mask(GridShape shape, double observed_fraction, Rng& rng) {
  require(observed_fraction > 0.0 && observed_fraction <= 1.0, "invalid_forward_model",
          "observed fraction must lie in (0, 1]");
  const int d = shape.size();
  const int n_obs = std::max(1, static_cast<int>(std::lround(observed_fraction * d)));
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  for (int i = d - 1; i > 0; --i) std::swap(order[i], order[rng.index(static_cast<std::size_t>(i) + 1)]);
  std::vector<int> mask(static_cast<std::size_t>(d), 0);
  for (int k = 0; k < n_obs; ++k) mask[order[k]] = 1;
  return mask;
}

std::vector<int> make_box_mask(GridShape shape, double box_fraction, Rng& rng) {
  require(box_fraction > 0.0 && box_fraction < 1.0, "invalid_forward_model", "box fraction must lie in (0, 1)");
  const int side_limit = std::min(shape.rows, shape.cols);
  const int side = std::clamp(static_cast<int>(std::lround(std::sqrt(box_fraction * shape.size()))), 1, side_limit);
  const int r0 = static_cast<int>(rng.index(static_cast<std::size_t>(shape.rows - side + 1)));
  const int c0 = static_cast<int>(rng.index(static_cast<std::size_t>(shape.cols - side + 1)));
  std::vector<int> mask(static_cast<std::size_t>(shape.size()), 1);
  for (int r = r0; r < r0 + side; ++r)
    for (int c = c0; c < c0 + side; ++c) mask[static_cast<std::size_t>(r * shape.cols + c)] = 0;
  return mask;
}

}  // namespace rdp
