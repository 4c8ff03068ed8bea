#include "beamsim/dnn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "beamsim/rng.hpp"

namespace beamsim {

namespace {

void matvec(const double* m, const double* v, double* out, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = m + static_cast<size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c] * v[c];
    out[r] += acc;
  }
}

// out += M^T v  (M rows x cols, v rows, out cols)
void matvec_t(const double* m, const double* v, double* out, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = m + static_cast<size_t>(r) * cols;
    const double s = v[r];
    if (s == 0.0) continue;
    for (int c = 0; c < cols; ++c) out[c] += s * row[c];
  }
}

// outer-product accumulation: g += v (rows) x w (cols)
void accum_outer(double* g, const double* v, const double* w, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* row = g + static_cast<size_t>(r) * cols;
    const double s = v[r];
    if (s == 0.0) continue;
    for (int c = 0; c < cols; ++c) row[c] += s * w[c];
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

DnnSpec DnnSpec::make(int image_nx, int image_ny, int window, int n_controls,
                      int aux_dim, int gru_mult, int dense_mult) {
  DnnSpec s;
  s.image_nx = image_nx;
  s.image_ny = image_ny;
  s.window = window;
  s.n_controls = n_controls;
  s.aux_dim = aux_dim;
  s.gru_width = gru_mult * n_controls;
  s.dense_width = dense_mult * n_controls;
  s.validate();
  return s;
}

void DnnSpec::validate() const {
  const int p3 = pool * pool * pool;
  if (image_nx <= 0 || image_ny <= 0 || image_nx % p3 != 0 || image_ny % p3 != 0)
    throw std::invalid_argument("DnnSpec: image size must divide by pool^3");
  if (window < 1 || n_controls < 1 || aux_dim < 0)
    throw std::invalid_argument("DnnSpec: bad window/control sizes");
  if (conv_kernel % 2 == 0 || conv_kernel < 1)
    throw std::invalid_argument("DnnSpec: conv kernel must be odd");
  if (gru_width < 1 || dense_width < 1)
    throw std::invalid_argument("DnnSpec: layer widths must be positive");
}

int DnnSpec::param_count() const {
  int total = 0;
  int c_in = 1;
  for (int b = 0; b < 3; ++b) {
    total += conv_channels[b] * c_in * conv_kernel * conv_kernel + conv_channels[b];
    c_in = conv_channels[b];
  }
  const int x = gru_input(), h = gru_width, d = dense_width, k = n_controls;
  total += 3 * (h * x + h * h + h);
  total += d * h + d + d * d + d + k * d + k;
  return total;
}

std::uint64_t DnnSpec::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  mix(image_nx);
  mix(image_ny);
  mix(window);
  mix(n_controls);
  mix(aux_dim);
  for (int c : conv_channels) mix(c);
  mix(conv_kernel);
  mix(pool);
  mix(gru_width);
  mix(dense_width);
  return h;
}

Dnn::Dnn(const DnnSpec& spec) : spec_(spec) {
  spec_.validate();
  int off = 0;
  int c_in = 1;
  const int kk = spec_.conv_kernel * spec_.conv_kernel;
  for (int b = 0; b < 3; ++b) {
    layout_.conv_w[b] = off;
    off += spec_.conv_channels[b] * c_in * kk;
    layout_.conv_b[b] = off;
    off += spec_.conv_channels[b];
    c_in = spec_.conv_channels[b];
  }
  const int x = spec_.gru_input(), h = spec_.gru_width;
  const int d = spec_.dense_width, k = spec_.n_controls;
  auto take = [&off](int n) {
    const int at = off;
    off += n;
    return at;
  };
  layout_.wz = take(h * x);
  layout_.uz = take(h * h);
  layout_.bz = take(h);
  layout_.wr = take(h * x);
  layout_.ur = take(h * h);
  layout_.br = take(h);
  layout_.wn = take(h * x);
  layout_.un = take(h * h);
  layout_.bn = take(h);
  layout_.w1 = take(d * h);
  layout_.b1 = take(d);
  layout_.w2 = take(d * d);
  layout_.b2 = take(d);
  layout_.wo = take(k * d);
  layout_.bo = take(k);
  total_params_ = off;
}

std::vector<double> Dnn::init_params(std::uint64_t seed) const {
  std::vector<double> p(total_params_, 0.0);
  Rng rng(seed);
  auto fill = [&](int at, int count, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < count; ++i) p[at + i] = limit * rng.uniform_sym();
  };
  const int kk = spec_.conv_kernel * spec_.conv_kernel;
  int c_in = 1;
  for (int b = 0; b < 3; ++b) {
    const int c_out = spec_.conv_channels[b];
    fill(layout_.conv_w[b], c_out * c_in * kk, c_in * kk, c_out * kk);
    c_in = c_out;
  }
  const int x = spec_.gru_input(), h = spec_.gru_width;
  const int d = spec_.dense_width, k = spec_.n_controls;
  fill(layout_.wz, h * x, x, h);
  fill(layout_.uz, h * h, h, h);
  fill(layout_.wr, h * x, x, h);
  fill(layout_.ur, h * h, h, h);
  fill(layout_.wn, h * x, x, h);
  fill(layout_.un, h * h, h, h);
  fill(layout_.w1, d * h, h, d);
  fill(layout_.w2, d * d, d, d);
  fill(layout_.wo, k * d, d, k);
  return p;
}

struct Dnn::Cache {
  struct Step {
    std::array<std::vector<double>, 3> conv_act;  // post-tanh feature maps
    std::array<std::vector<int>, 3> pool_arg;
    std::array<std::vector<double>, 3> pool_out;
    std::vector<double> x, z, r, ncand, rh, h_prev, h_new, d1, d2;
  };
  std::vector<Step> steps;
};

void Dnn::forward(const std::vector<double>& params, std::vector<double>& hidden,
                  const std::vector<const Observation*>& window,
                  std::vector<double>& outputs) const {
  forward_impl(params, hidden, window, outputs, nullptr);
}

void Dnn::forward_impl(const std::vector<double>& params, std::vector<double>& hidden,
                       const std::vector<const Observation*>& window,
                       std::vector<double>& outputs, Cache* cache) const {
  if (static_cast<int>(params.size()) != total_params_)
    throw std::invalid_argument("Dnn: parameter vector size mismatch");
  if (static_cast<int>(hidden.size()) != spec_.gru_width)
    throw std::invalid_argument("Dnn: hidden state size mismatch");
  const int k_ctrl = spec_.n_controls;
  const int n_steps = static_cast<int>(window.size());
  outputs.assign(static_cast<size_t>(n_steps) * k_ctrl, 0.0);
  if (cache) cache->steps.resize(n_steps);

  const int kern = spec_.conv_kernel, half_k = kern / 2;
  const int h_gru = spec_.gru_width, d_dense = spec_.dense_width;
  const int x_dim = spec_.gru_input();

  std::vector<double> conv_buf, pool_buf, in_buf;
  std::vector<int> arg_buf;
  std::vector<double> x(x_dim), z(h_gru), r(h_gru), ncand(h_gru), rh(h_gru);
  std::vector<double> d1(d_dense), d2(d_dense);

  for (int t = 0; t < n_steps; ++t) {
    const Observation& obs = *window[t];
    if (static_cast<int>(obs.image.size()) != spec_.image_nx * spec_.image_ny)
      throw std::invalid_argument("Dnn: observation image size mismatch");
    if (static_cast<int>(obs.aux.size()) != spec_.aux_dim)
      throw std::invalid_argument("Dnn: observation aux size mismatch");

    // conv stack
    int h_in = spec_.image_nx, w_in = spec_.image_ny, c_in = 1;
    in_buf = obs.image;
    for (int b = 0; b < 3; ++b) {
      const int c_out = spec_.conv_channels[b];
      conv_buf.assign(static_cast<size_t>(c_out) * h_in * w_in, 0.0);
      const double* wp = params.data() + layout_.conv_w[b];
      const double* bp = params.data() + layout_.conv_b[b];
      for (int co = 0; co < c_out; ++co) {
        double* out_map = conv_buf.data() + static_cast<size_t>(co) * h_in * w_in;
        for (int idx = 0; idx < h_in * w_in; ++idx) out_map[idx] = bp[co];
        for (int ci = 0; ci < c_in; ++ci) {
          const double* in_map = in_buf.data() + static_cast<size_t>(ci) * h_in * w_in;
          const double* kmat =
              wp + (static_cast<size_t>(co) * c_in + ci) * kern * kern;
          for (int di = 0; di < kern; ++di) {
            const int oi_lo = std::max(0, half_k - di);
            const int oi_hi = std::min(h_in, h_in + half_k - di);
            for (int dj = 0; dj < kern; ++dj) {
              const double wv = kmat[di * kern + dj];
              if (wv == 0.0) continue;
              const int oj_lo = std::max(0, half_k - dj);
              const int oj_hi = std::min(w_in, w_in + half_k - dj);
              for (int oi = oi_lo; oi < oi_hi; ++oi) {
                const double* in_row =
                    in_map + static_cast<size_t>(oi + di - half_k) * w_in + (dj - half_k);
                double* out_row = out_map + static_cast<size_t>(oi) * w_in;
                for (int oj = oj_lo; oj < oj_hi; ++oj) out_row[oj] += wv * in_row[oj];
              }
            }
          }
        }
        for (int idx = 0; idx < h_in * w_in; ++idx) out_map[idx] = std::tanh(out_map[idx]);
      }
      // max pool
      const int hp = h_in / spec_.pool, wp2 = w_in / spec_.pool;
      pool_buf.assign(static_cast<size_t>(c_out) * hp * wp2, 0.0);
      arg_buf.assign(pool_buf.size(), 0);
      for (int co = 0; co < c_out; ++co) {
        const double* map = conv_buf.data() + static_cast<size_t>(co) * h_in * w_in;
        for (int pi = 0; pi < hp; ++pi)
          for (int pj = 0; pj < wp2; ++pj) {
            double best = -1e300;
            int best_at = 0;
            for (int a = 0; a < spec_.pool; ++a)
              for (int bb = 0; bb < spec_.pool; ++bb) {
                const int ii = pi * spec_.pool + a, jj = pj * spec_.pool + bb;
                const double v = map[static_cast<size_t>(ii) * w_in + jj];
                if (v > best) {
                  best = v;
                  best_at = ii * w_in + jj;
                }
              }
            const size_t at = (static_cast<size_t>(co) * hp + pi) * wp2 + pj;
            pool_buf[at] = best;
            arg_buf[at] = best_at;
          }
      }
      if (cache) {
        cache->steps[t].conv_act[b] = conv_buf;
        cache->steps[t].pool_arg[b] = arg_buf;
        cache->steps[t].pool_out[b] = pool_buf;
      }
      in_buf = pool_buf;
      h_in = hp;
      w_in = wp2;
      c_in = c_out;
    }

    // gru input: [features, J, aux]
    const int f = spec_.flat_features();
    std::memcpy(x.data(), in_buf.data(), sizeof(double) * f);
    x[f] = obs.metric;
    for (int a = 0; a < spec_.aux_dim; ++a) x[f + 1 + a] = obs.aux[a];

    // gru step
    std::memcpy(z.data(), params.data() + layout_.bz, sizeof(double) * h_gru);
    matvec(params.data() + layout_.wz, x.data(), z.data(), h_gru, x_dim);
    matvec(params.data() + layout_.uz, hidden.data(), z.data(), h_gru, h_gru);
    std::memcpy(r.data(), params.data() + layout_.br, sizeof(double) * h_gru);
    matvec(params.data() + layout_.wr, x.data(), r.data(), h_gru, x_dim);
    matvec(params.data() + layout_.ur, hidden.data(), r.data(), h_gru, h_gru);
    for (int i = 0; i < h_gru; ++i) {
      z[i] = sigmoid(z[i]);
      r[i] = sigmoid(r[i]);
      rh[i] = r[i] * hidden[i];
    }
    std::memcpy(ncand.data(), params.data() + layout_.bn, sizeof(double) * h_gru);
    matvec(params.data() + layout_.wn, x.data(), ncand.data(), h_gru, x_dim);
    matvec(params.data() + layout_.un, rh.data(), ncand.data(), h_gru, h_gru);
    for (int i = 0; i < h_gru; ++i) ncand[i] = std::tanh(ncand[i]);

    if (cache) {
      auto& st = cache->steps[t];
      st.x = x;
      st.z = z;
      st.r = r;
      st.ncand = ncand;
      st.rh = rh;
      st.h_prev = hidden;
    }
    for (int i = 0; i < h_gru; ++i)
      hidden[i] = (1.0 - z[i]) * ncand[i] + z[i] * hidden[i];

    // dense head
    std::memcpy(d1.data(), params.data() + layout_.b1, sizeof(double) * d_dense);
    matvec(params.data() + layout_.w1, hidden.data(), d1.data(), d_dense, h_gru);
    for (int i = 0; i < d_dense; ++i) d1[i] = std::tanh(d1[i]);
    std::memcpy(d2.data(), params.data() + layout_.b2, sizeof(double) * d_dense);
    matvec(params.data() + layout_.w2, d1.data(), d2.data(), d_dense, d_dense);
    for (int i = 0; i < d_dense; ++i) d2[i] = std::tanh(d2[i]);
    double* out_row = outputs.data() + static_cast<size_t>(t) * k_ctrl;
    std::memcpy(out_row, params.data() + layout_.bo, sizeof(double) * k_ctrl);
    matvec(params.data() + layout_.wo, d2.data(), out_row, k_ctrl, d_dense);

    if (cache) {
      auto& st = cache->steps[t];
      st.h_new = hidden;
      st.d1 = d1;
      st.d2 = d2;
    }
  }
}

std::vector<double> Dnn::weighted_output_grad(
    const std::vector<double>& params, const std::vector<double>& hidden0,
    const std::vector<const Observation*>& window, const std::vector<double>& weights,
    std::vector<double>* outputs) const {
  const int k_ctrl = spec_.n_controls;
  const int n_steps = static_cast<int>(window.size());
  if (weights.size() != static_cast<size_t>(n_steps) * k_ctrl)
    throw std::invalid_argument("weighted_output_grad: weights shape mismatch");
  for (double w : weights)
    if (!std::isfinite(w))
      throw std::invalid_argument("weighted_output_grad: non-finite weights");

  Cache cache;
  std::vector<double> hidden = hidden0;
  std::vector<double> outs;
  forward_impl(params, hidden, window, outs, &cache);
  if (outputs) *outputs = outs;

  std::vector<double> grad(total_params_, 0.0);
  const int h_gru = spec_.gru_width, d_dense = spec_.dense_width;
  const int x_dim = spec_.gru_input();
  const int kern = spec_.conv_kernel, half_k = kern / 2;

  std::vector<double> dh(h_gru, 0.0);
  std::vector<double> dd2(d_dense), dd1(d_dense), dht(h_gru);
  std::vector<double> dz(h_gru), dn(h_gru), dr(h_gru), drh(h_gru), dx(x_dim);
  std::vector<double> d_pool, d_conv, d_in;

  for (int t = n_steps - 1; t >= 0; --t) {
    const auto& st = cache.steps[t];
    const double* du = weights.data() + static_cast<size_t>(t) * k_ctrl;

    // output layer
    std::fill(dd2.begin(), dd2.end(), 0.0);
    accum_outer(grad.data() + layout_.wo, du, st.d2.data(), k_ctrl, d_dense);
    for (int k = 0; k < k_ctrl; ++k) grad[layout_.bo + k] += du[k];
    matvec_t(params.data() + layout_.wo, du, dd2.data(), k_ctrl, d_dense);
    for (int i = 0; i < d_dense; ++i) dd2[i] *= 1.0 - st.d2[i] * st.d2[i];

    std::fill(dd1.begin(), dd1.end(), 0.0);
    accum_outer(grad.data() + layout_.w2, dd2.data(), st.d1.data(), d_dense, d_dense);
    for (int i = 0; i < d_dense; ++i) grad[layout_.b2 + i] += dd2[i];
    matvec_t(params.data() + layout_.w2, dd2.data(), dd1.data(), d_dense, d_dense);
    for (int i = 0; i < d_dense; ++i) dd1[i] *= 1.0 - st.d1[i] * st.d1[i];

    std::copy(dh.begin(), dh.end(), dht.begin());
    accum_outer(grad.data() + layout_.w1, dd1.data(), st.h_new.data(), d_dense, h_gru);
    for (int i = 0; i < d_dense; ++i) grad[layout_.b1 + i] += dd1[i];
    matvec_t(params.data() + layout_.w1, dd1.data(), dht.data(), d_dense, h_gru);

    // gru backward; dht is dL/dh_new
    for (int i = 0; i < h_gru; ++i) {
      dz[i] = dht[i] * (st.h_prev[i] - st.ncand[i]);
      dn[i] = dht[i] * (1.0 - st.z[i]);
      dh[i] = dht[i] * st.z[i];  // dL/dh_prev accumulator
      dn[i] *= 1.0 - st.ncand[i] * st.ncand[i];
    }
    accum_outer(grad.data() + layout_.wn, dn.data(), st.x.data(), h_gru, x_dim);
    accum_outer(grad.data() + layout_.un, dn.data(), st.rh.data(), h_gru, h_gru);
    for (int i = 0; i < h_gru; ++i) grad[layout_.bn + i] += dn[i];
    std::fill(drh.begin(), drh.end(), 0.0);
    matvec_t(params.data() + layout_.un, dn.data(), drh.data(), h_gru, h_gru);
    for (int i = 0; i < h_gru; ++i) {
      dr[i] = drh[i] * st.h_prev[i];
      dh[i] += drh[i] * st.r[i];
      dz[i] *= st.z[i] * (1.0 - st.z[i]);
      dr[i] *= st.r[i] * (1.0 - st.r[i]);
    }
    accum_outer(grad.data() + layout_.wz, dz.data(), st.x.data(), h_gru, x_dim);
    accum_outer(grad.data() + layout_.uz, dz.data(), st.h_prev.data(), h_gru, h_gru);
    accum_outer(grad.data() + layout_.wr, dr.data(), st.x.data(), h_gru, x_dim);
    accum_outer(grad.data() + layout_.ur, dr.data(), st.h_prev.data(), h_gru, h_gru);
    for (int i = 0; i < h_gru; ++i) {
      grad[layout_.bz + i] += dz[i];
      grad[layout_.br + i] += dr[i];
    }
    matvec_t(params.data() + layout_.uz, dz.data(), dh.data(), h_gru, h_gru);
    matvec_t(params.data() + layout_.ur, dr.data(), dh.data(), h_gru, h_gru);
    std::fill(dx.begin(), dx.end(), 0.0);
    matvec_t(params.data() + layout_.wz, dz.data(), dx.data(), h_gru, x_dim);
    matvec_t(params.data() + layout_.wr, dr.data(), dx.data(), h_gru, x_dim);
    matvec_t(params.data() + layout_.wn, dn.data(), dx.data(), h_gru, x_dim);

    // conv stack backward (image gradient itself is not needed)
    d_pool.assign(dx.begin(), dx.begin() + spec_.flat_features());
    int c_in = spec_.conv_channels[1];  // updated per block below
    for (int b = 2; b >= 0; --b) {
      const int c_out = spec_.conv_channels[b];
      c_in = b == 0 ? 1 : spec_.conv_channels[b - 1];
      int h_in = spec_.image_nx, w_in = spec_.image_ny;
      for (int bb = 0; bb < b; ++bb) {
        h_in /= spec_.pool;
        w_in /= spec_.pool;
      }
      const auto& act = st.conv_act[b];
      const auto& arg = st.pool_arg[b];
      // unpool and tanh'
      d_conv.assign(static_cast<size_t>(c_out) * h_in * w_in, 0.0);
      const int hp = h_in / spec_.pool, wp2 = w_in / spec_.pool;
      for (int co = 0; co < c_out; ++co)
        for (int pi = 0; pi < hp; ++pi)
          for (int pj = 0; pj < wp2; ++pj) {
            const size_t pat = (static_cast<size_t>(co) * hp + pi) * wp2 + pj;
            const size_t cat = static_cast<size_t>(co) * h_in * w_in + arg[pat];
            d_conv[cat] += d_pool[pat] * (1.0 - act[cat] * act[cat]);
          }
      // weight/bias/input gradients
      const std::vector<double>& input =
          b == 0 ? window[t]->image : st.pool_out[b - 1];
      double* gw = grad.data() + layout_.conv_w[b];
      double* gb = grad.data() + layout_.conv_b[b];
      const double* wp = params.data() + layout_.conv_w[b];
      if (b > 0) d_in.assign(static_cast<size_t>(c_in) * h_in * w_in, 0.0);
      for (int co = 0; co < c_out; ++co) {
        const double* dmap = d_conv.data() + static_cast<size_t>(co) * h_in * w_in;
        for (int idx = 0; idx < h_in * w_in; ++idx) gb[co] += dmap[idx];
        for (int ci = 0; ci < c_in; ++ci) {
          const double* in_map = input.data() + static_cast<size_t>(ci) * h_in * w_in;
          double* kw = gw + (static_cast<size_t>(co) * c_in + ci) * kern * kern;
          const double* km = wp + (static_cast<size_t>(co) * c_in + ci) * kern * kern;
          double* dimap =
              b > 0 ? d_in.data() + static_cast<size_t>(ci) * h_in * w_in : nullptr;
          for (int di = 0; di < kern; ++di) {
            const int oi_lo = std::max(0, half_k - di);
            const int oi_hi = std::min(h_in, h_in + half_k - di);
            for (int dj = 0; dj < kern; ++dj) {
              const int oj_lo = std::max(0, half_k - dj);
              const int oj_hi = std::min(w_in, w_in + half_k - dj);
              double acc = 0.0;
              const double wv = km[di * kern + dj];
              for (int oi = oi_lo; oi < oi_hi; ++oi) {
                const double* in_row =
                    in_map + static_cast<size_t>(oi + di - half_k) * w_in + (dj - half_k);
                const double* d_row = dmap + static_cast<size_t>(oi) * w_in;
                if (dimap) {
                  double* di_row =
                      dimap + static_cast<size_t>(oi + di - half_k) * w_in + (dj - half_k);
                  for (int oj = oj_lo; oj < oj_hi; ++oj) {
                    acc += d_row[oj] * in_row[oj];
                    di_row[oj] += wv * d_row[oj];
                  }
                } else {
                  for (int oj = oj_lo; oj < oj_hi; ++oj) acc += d_row[oj] * in_row[oj];
                }
              }
              kw[di * kern + dj] += acc;
            }
          }
        }
      }
      if (b > 0) d_pool = d_in;
    }
  }
  return grad;
}

DnnState::DnnState(const DnnSpec& s, std::uint64_t seed) : spec(s) {
  Dnn net(s);
  params = net.init_params(seed);
  momentum.assign(params.size(), 0.0);
  h_infer.assign(s.gru_width, 0.0);
}

std::vector<double> infer_step(const Dnn& net, DnnState& state, const Observation& obs) {
  std::vector<const Observation*> window{&obs};
  std::vector<double> out;
  net.forward(state.params, state.h_infer, window, out);
  return out;
}

void update_weights(const Dnn& net, DnnState& state,
                    const std::vector<const Observation*>& window,
                    const std::vector<double>& hidden0,
                    const std::vector<double>& metric_weights,
                    const std::vector<double>& u_prev_first, const TrainHyper& hyper) {
  const int k_ctrl = net.spec().n_controls;
  const int n_steps = static_cast<int>(window.size());
  if (metric_weights.size() != static_cast<size_t>(n_steps) * k_ctrl)
    throw std::invalid_argument("update_weights: metric weight shape mismatch");
  if (static_cast<int>(u_prev_first.size()) != k_ctrl)
    throw std::invalid_argument("update_weights: u_prev_first size mismatch");

  // forward pass to get the window outputs for the trajectory term
  std::vector<double> h = hidden0;
  std::vector<double> outs;
  net.forward(state.params, h, window, outs);

  std::vector<double> weights = metric_weights;
  if (hyper.gamma_s != 0.0) {
    for (int t = 0; t < n_steps; ++t)
      for (int k = 0; k < k_ctrl; ++k) {
        const double prev =
            t == 0 ? u_prev_first[k] : outs[static_cast<size_t>(t - 1) * k_ctrl + k];
        weights[static_cast<size_t>(t) * k_ctrl + k] -=
            2.0 * hyper.gamma_s * (outs[static_cast<size_t>(t) * k_ctrl + k] - prev);
      }
  }

  std::vector<double> grad =
      net.weighted_output_grad(state.params, hidden0, window, weights);

  std::vector<double> g_new(state.momentum.size());
  for (size_t p = 0; p < g_new.size(); ++p) {
    g_new[p] = hyper.momentum * state.momentum[p] + grad[p] -
               2.0 * hyper.gamma_l * state.params[p];
    if (!std::isfinite(g_new[p]))
      throw std::runtime_error("update_weights: non-finite gradient; state unchanged");
  }
  for (size_t p = 0; p < g_new.size(); ++p) state.params[p] += g_new[p];
  state.momentum = std::move(g_new);
}

namespace {
constexpr char kCkptMagic[16] = {'B', 'S', 'I', 'M', 'D', 'N', 'N', 'C',
                                 'K', 'P', 'T', '0', '0', '0', '0', '1'};
}

void save_checkpoint(const std::string& path, const DnnState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot write " + path);
  os.write(kCkptMagic, 16);
  const std::uint64_t h = state.spec.hash();
  const std::uint64_t p = state.params.size();
  os.write(reinterpret_cast<const char*>(&h), 8);
  os.write(reinterpret_cast<const char*>(&p), 8);
  os.write(reinterpret_cast<const char*>(state.params.data()), 8 * state.params.size());
  os.write(reinterpret_cast<const char*>(state.momentum.data()),
           8 * state.momentum.size());
}

void load_checkpoint(const std::string& path, DnnState& state) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char head[16];
  is.read(head, 16);
  if (!is || std::memcmp(head, kCkptMagic, 16) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  std::uint64_t h = 0, p = 0;
  is.read(reinterpret_cast<char*>(&h), 8);
  is.read(reinterpret_cast<char*>(&p), 8);
  if (h != state.spec.hash())
    throw std::runtime_error("load_checkpoint: checkpoint spec hash mismatch");
  if (p != state.params.size())
    throw std::runtime_error("load_checkpoint: parameter count mismatch");
  is.read(reinterpret_cast<char*>(state.params.data()), 8 * p);
  is.read(reinterpret_cast<char*>(state.momentum.data()), 8 * p);
  if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
}

}  // namespace beamsim
