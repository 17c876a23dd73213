#include "maskwarp/interest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "maskwarp/error.hpp"

namespace maskwarp {

namespace {

// Neumaier summation keeps the O((hc*wc)^2) descriptor sum stable.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_same_grid(const InterestHeads& n, const InterestHeads& o) {
  if (n.hc() != o.hc() || n.wc() != o.wc()) {
    throw InvalidArgument("interest heads grid mismatch: " + std::to_string(n.hc()) + "x" +
                          std::to_string(n.wc()) + " vs " + std::to_string(o.hc()) + "x" +
                          std::to_string(o.wc()));
  }
}

}  // namespace

InterestHeads::InterestHeads(int hc, int wc, int point_channels, int desc_channels, int cell_size,
                             std::vector<double> point_head, std::vector<double> desc_head)
    : hc_(hc),
      wc_(wc),
      point_channels_(point_channels),
      desc_channels_(desc_channels),
      cell_size_(cell_size),
      point_(std::move(point_head)),
      desc_(std::move(desc_head)) {
  if (hc <= 0 || wc <= 0 || point_channels <= 0 || desc_channels <= 0 || cell_size <= 0) {
    throw InvalidArgument("interest heads need positive dimensions");
  }
  const std::size_t cells = static_cast<std::size_t>(hc) * wc;
  if (point_.size() != cells * point_channels || desc_.size() != cells * desc_channels) {
    throw InvalidArgument("interest head buffers do not match the declared dimensions");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(point_.begin(), point_.end(), finite) ||
      !std::all_of(desc_.begin(), desc_.end(), finite)) {
    throw InvalidArgument("interest heads contain non-finite values");
  }
}

double Homography::determinant() const noexcept {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

bool Homography::invertible() const noexcept {
  double scale = 0.0;
  for (double v : m) {
    if (!std::isfinite(v)) return false;
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) return false;
  return std::abs(determinant()) > 1e-12 * scale * scale * scale;
}

bool Homography::project(double x, double y, double& px, double& py) const noexcept {
  const double w = m[6] * x + m[7] * y + m[8];
  if (w == 0.0) return false;
  px = (m[0] * x + m[1] * y + m[2]) / w;
  py = (m[3] * x + m[4] * y + m[5]) / w;
  return true;
}

void IRParams::validate() const {
  if (!(std::isfinite(m_p) && std::isfinite(m_n) && m_p > m_n && m_n >= 0.0)) {
    throw InvalidArgument("margins must satisfy m_p > m_n >= 0");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be > 0");
  if (!std::isfinite(lambda) || !std::isfinite(mu) || !std::isfinite(beta_d)) {
    throw InvalidArgument("lambda, mu and beta_d must be finite");
  }
  if (!homography.invertible()) throw InvalidArgument("homography is not invertible");
}

CorrespondenceGrid::CorrespondenceGrid(int hc, int wc, std::vector<std::uint8_t> bits)
    : hc_(hc), wc_(wc), bits_(std::move(bits)) {
  const std::size_t cells = static_cast<std::size_t>(hc) * wc;
  if (hc <= 0 || wc <= 0 || bits_.size() != cells * cells) {
    throw InvalidArgument("correspondence grid size mismatch");
  }
}

std::size_t CorrespondenceGrid::positives() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

CorrespondenceGrid correspondence_grid(int hc, int wc, const Homography& homography,
                                       int cell_size, double tau) {
  if (!homography.invertible()) throw InvalidArgument("homography is not invertible");
  if (hc <= 0 || wc <= 0 || cell_size <= 0) throw InvalidArgument("grid dimensions must be positive");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be > 0");

  const std::size_t cells = static_cast<std::size_t>(hc) * wc;
  const double half = cell_size / 2.0;
  std::vector<std::uint8_t> bits(cells * cells, 0);
  for (int h = 0; h < hc; ++h) {
    for (int w = 0; w < wc; ++w) {
      double px = 0.0, py = 0.0;
      if (!homography.project(w * cell_size + half, h * cell_size + half, px, py)) continue;
      const std::size_t row = (static_cast<std::size_t>(h) * wc + w) * cells;
      for (int i = 0; i < hc; ++i) {
        for (int j = 0; j < wc; ++j) {
          const double d = std::hypot(px - (j * cell_size + half), py - (i * cell_size + half));
          if (d <= tau) bits[row + static_cast<std::size_t>(i) * wc + j] = 1;
        }
      }
    }
  }
  return CorrespondenceGrid(hc, wc, std::move(bits));
}

double point_loss(const InterestHeads& n, const InterestHeads& o) {
  require_same_grid(n, o);
  if (n.point_channels() != o.point_channels()) {
    throw InvalidArgument("point heads have different channel counts");
  }
  CompensatedSum sum;
  for (int h = 0; h < n.hc(); ++h) {
    for (int w = 0; w < n.wc(); ++w) {
      const double* a = n.point(h, w);
      const double* b = o.point(h, w);
      double sq = 0.0;
      for (int k = 0; k < n.point_channels(); ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
      sum.add(sq);
    }
  }
  return sum.value() / (static_cast<double>(n.hc()) * n.wc());
}

double descriptor_loss(const InterestHeads& n, const InterestHeads& o,
                       const CorrespondenceGrid& g, const IRParams& params) {
  require_same_grid(n, o);
  if (n.desc_channels() != o.desc_channels()) {
    throw InvalidArgument("descriptor heads have different channel counts");
  }
  if (g.hc() != n.hc() || g.wc() != n.wc()) {
    throw InvalidArgument("correspondence grid does not match the heads");
  }
  const int hc = n.hc();
  const int wc = n.wc();
  const int ch = n.desc_channels();
  CompensatedSum sum;
  for (int h = 0; h < hc; ++h) {
    for (int w = 0; w < wc; ++w) {
      const double* dn = n.desc(h, w);
      for (int i = 0; i < hc; ++i) {
        for (int j = 0; j < wc; ++j) {
          const double* dl = o.desc(i, j);
          double dot = 0.0;
          for (int k = 0; k < ch; ++k) dot += dn[k] * dl[k];
          if (g(h, w, i, j)) {
            sum.add(params.beta_d * std::max(0.0, params.m_p - dot));
          } else {
            sum.add(std::max(0.0, dot - params.m_n));
          }
        }
      }
    }
  }
  const double cells = static_cast<double>(hc) * wc;
  return sum.value() / (cells * cells);
}

IRLoss ir_loss(const InterestHeads& n, const InterestHeads& o, const IRParams& params) {
  params.validate();
  require_same_grid(n, o);
  if (n.cell_size() != o.cell_size()) throw InvalidArgument("interest heads use different cell sizes");
  const CorrespondenceGrid g =
      correspondence_grid(n.hc(), n.wc(), params.homography, n.cell_size(), params.tau);
  IRLoss out;
  out.point = point_loss(n, o);
  out.desc = descriptor_loss(n, o, g, params);
  out.total = out.point + params.lambda * out.desc;
  return out;
}

double ictt_loss(double nst_loss, const IRLoss& ir, double mu) { return nst_loss + mu * ir.total; }

}  // namespace maskwarp
