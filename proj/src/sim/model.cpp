// SPDX-License-Identifier: Apache-2.0
#include "fastssl/sim/model.hpp"

#include <cmath>
#include <sstream>

namespace fastssl::sim {

std::string shape_string(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i)
    os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

constexpr std::array<std::string_view, kNumParams> kNames = {
    "encoder.conv1.weight", "encoder.conv1.bias",   "encoder.conv2.weight",
    "encoder.conv2.bias",   "encoder.conv3.weight", "encoder.conv3.bias",
    "projector.fc1.weight", "projector.fc1.bias",   "projector.fc2.weight",
    "projector.fc2.bias",   "predictor.fc1.weight", "predictor.fc1.bias",
    "predictor.fc2.weight", "predictor.fc2.bias"};

constexpr int kKernel = 3;
constexpr int kTaps = kKernel * kKernel;

template <typename T> void check_finite(const Tensor<T> &t, const char *layer) {
  for (const T v : t.data)
    if (!std::isfinite(v))
      throw NumericError(std::string("non-finite activation in ") + layer);
}

template <typename T> void relu_inplace(Tensor<T> &t) {
  for (auto &v : t.data)
    v = v > T(0) ? v : T(0);
}

// cols is [cin * 9, ho * wo] for one image.
template <typename T>
void im2col(const T *x, int cin, int h, int w, int ho, int wo, T *cols) {
  const int n = ho * wo;
  for (int ci = 0; ci < cin; ++ci)
    for (int ky = 0; ky < kKernel; ++ky)
      for (int kx = 0; kx < kKernel; ++kx) {
        T *row = cols + static_cast<std::size_t>((ci * kKernel + ky) * kKernel + kx) * n;
        const T *plane = x + static_cast<std::size_t>(ci) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * 2 + ky - 1;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * 2 + kx - 1;
            row[oy * wo + ox] = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                                    ? plane[iy * w + ix]
                                    : T(0);
          }
        }
      }
}

template <typename T>
void col2im_add(const T *cols, int cin, int h, int w, int ho, int wo, T *dx) {
  const int n = ho * wo;
  for (int ci = 0; ci < cin; ++ci)
    for (int ky = 0; ky < kKernel; ++ky)
      for (int kx = 0; kx < kKernel; ++kx) {
        const T *row =
            cols + static_cast<std::size_t>((ci * kKernel + ky) * kKernel + kx) * n;
        T *plane = dx + static_cast<std::size_t>(ci) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * 2 + ky - 1;
          if (iy < 0 || iy >= h)
            continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * 2 + kx - 1;
            if (ix >= 0 && ix < w)
              plane[iy * w + ix] += row[oy * wo + ox];
          }
        }
      }
}

template <typename T>
Tensor<T> conv_forward(const Tensor<T> &x, const Tensor<T> &weight,
                       const Tensor<T> &bias, double &flops) {
  const int batch = static_cast<int>(x.dim(0));
  const int cin = static_cast<int>(x.dim(1));
  const int h = static_cast<int>(x.dim(2));
  const int w = static_cast<int>(x.dim(3));
  const int cout = static_cast<int>(weight.dim(0));
  const int ho = conv_out_side(h);
  const int wo = conv_out_side(w);
  const int k = cin * kTaps;
  const int n = ho * wo;

  Tensor<T> out({static_cast<std::size_t>(batch), static_cast<std::size_t>(cout),
                 static_cast<std::size_t>(ho), static_cast<std::size_t>(wo)});
  std::vector<T> cols(static_cast<std::size_t>(k) * n);
  for (int b = 0; b < batch; ++b) {
    im2col(x.ptr() + static_cast<std::size_t>(b) * cin * h * w, cin, h, w, ho,
           wo, cols.data());
    T *ob = out.ptr() + static_cast<std::size_t>(b) * cout * n;
    for (int co = 0; co < cout; ++co) {
      T *o = ob + static_cast<std::size_t>(co) * n;
      std::fill(o, o + n, bias[co]);
      const T *wrow = weight.ptr() + static_cast<std::size_t>(co) * k;
      for (int kk = 0; kk < k; ++kk) {
        const T wv = wrow[kk];
        const T *c = cols.data() + static_cast<std::size_t>(kk) * n;
        for (int j = 0; j < n; ++j)
          o[j] += wv * c[j];
      }
    }
  }
  flops += 2.0 * kTaps * cin * cout * static_cast<double>(n) * batch;
  return out;
}

// grad_out must already include the ReLU mask.
template <typename T>
void conv_backward(const Tensor<T> &x, const Tensor<T> &weight,
                   const Tensor<T> &grad_out, Tensor<T> &grad_w,
                   Tensor<T> &grad_b, Tensor<T> *grad_x) {
  const int batch = static_cast<int>(x.dim(0));
  const int cin = static_cast<int>(x.dim(1));
  const int h = static_cast<int>(x.dim(2));
  const int w = static_cast<int>(x.dim(3));
  const int cout = static_cast<int>(weight.dim(0));
  const int ho = conv_out_side(h);
  const int wo = conv_out_side(w);
  const int k = cin * kTaps;
  const int n = ho * wo;

  std::vector<T> cols(static_cast<std::size_t>(k) * n);
  std::vector<T> dcols;
  if (grad_x) {
    *grad_x = Tensor<T>(x.shape);
    dcols.resize(cols.size());
  }
  for (int b = 0; b < batch; ++b) {
    im2col(x.ptr() + static_cast<std::size_t>(b) * cin * h * w, cin, h, w, ho,
           wo, cols.data());
    const T *gb = grad_out.ptr() + static_cast<std::size_t>(b) * cout * n;
    for (int co = 0; co < cout; ++co) {
      const T *g = gb + static_cast<std::size_t>(co) * n;
      T bsum = 0;
      for (int j = 0; j < n; ++j)
        bsum += g[j];
      grad_b[co] += bsum;
      T *gw = grad_w.ptr() + static_cast<std::size_t>(co) * k;
      for (int kk = 0; kk < k; ++kk) {
        const T *c = cols.data() + static_cast<std::size_t>(kk) * n;
        T dot = 0;
        for (int j = 0; j < n; ++j)
          dot += g[j] * c[j];
        gw[kk] += dot;
      }
    }
    if (grad_x) {
      std::fill(dcols.begin(), dcols.end(), T(0));
      for (int co = 0; co < cout; ++co) {
        const T *g = gb + static_cast<std::size_t>(co) * n;
        const T *wrow = weight.ptr() + static_cast<std::size_t>(co) * k;
        for (int kk = 0; kk < k; ++kk) {
          const T wv = wrow[kk];
          T *dc = dcols.data() + static_cast<std::size_t>(kk) * n;
          for (int j = 0; j < n; ++j)
            dc[j] += wv * g[j];
        }
      }
      col2im_add(dcols.data(), cin, h, w, ho, wo,
                 grad_x->ptr() + static_cast<std::size_t>(b) * cin * h * w);
    }
  }
}

// Y[b, o] = sum_i X[b, i] W[o, i] + bias[o]
template <typename T>
Tensor<T> linear_forward(const Tensor<T> &x, const Tensor<T> &weight,
                         const Tensor<T> &bias, double &flops) {
  const std::size_t batch = x.dim(0), in = x.dim(1), out = weight.dim(0);
  Tensor<T> y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    const T *xr = x.ptr() + b * in;
    for (std::size_t o = 0; o < out; ++o) {
      const T *wr = weight.ptr() + o * in;
      T acc = 0;
      for (std::size_t i = 0; i < in; ++i)
        acc += xr[i] * wr[i];
      y[b * out + o] = acc + bias[o];
    }
  }
  flops += 2.0 * static_cast<double>(in * out * batch);
  return y;
}

template <typename T>
void linear_backward(const Tensor<T> &x, const Tensor<T> &weight,
                     const Tensor<T> &grad_y, Tensor<T> &grad_w,
                     Tensor<T> &grad_b, Tensor<T> *grad_x) {
  const std::size_t batch = x.dim(0), in = x.dim(1), out = weight.dim(0);
  if (grad_x)
    *grad_x = Tensor<T>({batch, in});
  for (std::size_t b = 0; b < batch; ++b) {
    const T *xr = x.ptr() + b * in;
    const T *gy = grad_y.ptr() + b * out;
    for (std::size_t o = 0; o < out; ++o) {
      const T g = gy[o];
      grad_b[o] += g;
      T *gw = grad_w.ptr() + o * in;
      for (std::size_t i = 0; i < in; ++i)
        gw[i] += g * xr[i];
      if (grad_x) {
        const T *wr = weight.ptr() + o * in;
        T *gx = grad_x->ptr() + b * in;
        for (std::size_t i = 0; i < in; ++i)
          gx[i] += g * wr[i];
      }
    }
  }
}

template <typename T>
Tensor<T> standardize_forward(const Tensor<T> &x, T eps,
                              std::vector<T> &inv_std) {
  const std::size_t batch = x.dim(0), feat = x.dim(1);
  Tensor<T> y(x.shape);
  inv_std.assign(feat, T(0));
  for (std::size_t j = 0; j < feat; ++j) {
    T mean = 0;
    for (std::size_t b = 0; b < batch; ++b)
      mean += x[b * feat + j];
    mean /= static_cast<T>(batch);
    T var = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      const T d = x[b * feat + j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(batch);
    const T inv = T(1) / std::sqrt(var + eps);
    inv_std[j] = inv;
    for (std::size_t b = 0; b < batch; ++b)
      y[b * feat + j] = (x[b * feat + j] - mean) * inv;
  }
  return y;
}

// dx = inv_std * (dy - mean(dy) - y * mean(dy * y)), per feature column.
template <typename T>
Tensor<T> standardize_backward(const Tensor<T> &y, const std::vector<T> &inv_std,
                               const Tensor<T> &grad_y) {
  const std::size_t batch = y.dim(0), feat = y.dim(1);
  Tensor<T> gx(y.shape);
  const T inv_b = T(1) / static_cast<T>(batch);
  for (std::size_t j = 0; j < feat; ++j) {
    T mean_g = 0, mean_gy = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      const T g = grad_y[b * feat + j];
      mean_g += g;
      mean_gy += g * y[b * feat + j];
    }
    mean_g *= inv_b;
    mean_gy *= inv_b;
    for (std::size_t b = 0; b < batch; ++b)
      gx[b * feat + j] =
          inv_std[j] * (grad_y[b * feat + j] - mean_g - y[b * feat + j] * mean_gy);
  }
  return gx;
}

template <typename T> Tensor<T> global_avg_pool(const Tensor<T> &x) {
  const std::size_t batch = x.dim(0), ch = x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor<T> out({batch, ch});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < ch; ++c) {
      const T *p = x.ptr() + (b * ch + c) * hw;
      T s = 0;
      for (std::size_t i = 0; i < hw; ++i)
        s += p[i];
      out[b * ch + c] = s / static_cast<T>(hw);
    }
  return out;
}

// Multiplies grad by the ReLU mask recovered from the post-ReLU activation.
template <typename T> void mask_relu(Tensor<T> &grad, const Tensor<T> &act) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(act[i] > T(0)))
      grad[i] = T(0);
}

template <typename T>
void check_input(const ModelParams<T> &params, const Tensor<T> &batch) {
  if (batch.shape.size() != 4 || batch.dim(0) < 1)
    throw ConfigError("model input must be [B, C, H, W], got " +
                      shape_string(batch.shape));
  if (batch.dim(1) != static_cast<std::size_t>(params.spec.in_channels))
    throw ConfigError("model input has wrong channel count");
  if (batch.dim(2) != batch.dim(3) || batch.dim(2) < 8)
    throw ConfigError("model input must be square with side >= 8, got " +
                      shape_string(batch.shape));
}

} // namespace

std::string_view param_name(std::size_t id) { return kNames.at(id); }

void ModelSpec::validate() const {
  if (in_channels < 1 || proj_hidden < 1 || embed_dim < 1 || pred_hidden < 1)
    throw ConfigError("model widths must be positive");
  for (int c : conv_channels)
    if (c < 1)
      throw ConfigError("conv widths must be positive");
  if (!(norm_eps > 0.0))
    throw ConfigError("norm_eps must be positive");
}

template <typename T> std::size_t ModelParams<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto &t : tensors)
    n += t.size();
  return n;
}

template <typename T> ModelParams<T> ModelParams<T>::zeros_like() const {
  return make_params<T>(spec);
}

template <typename T> ModelParams<T> make_params(const ModelSpec &spec) {
  spec.validate();
  ModelParams<T> p;
  p.spec = spec;
  const auto c0 = static_cast<std::size_t>(spec.in_channels);
  const auto c1 = static_cast<std::size_t>(spec.conv_channels[0]);
  const auto c2 = static_cast<std::size_t>(spec.conv_channels[1]);
  const auto c3 = static_cast<std::size_t>(spec.conv_channels[2]);
  const auto ph = static_cast<std::size_t>(spec.proj_hidden);
  const auto d = static_cast<std::size_t>(spec.embed_dim);
  const auto qh = static_cast<std::size_t>(spec.pred_hidden);
  p[kConv1W] = Tensor<T>({c1, c0, 3, 3});
  p[kConv1B] = Tensor<T>({c1});
  p[kConv2W] = Tensor<T>({c2, c1, 3, 3});
  p[kConv2B] = Tensor<T>({c2});
  p[kConv3W] = Tensor<T>({c3, c2, 3, 3});
  p[kConv3B] = Tensor<T>({c3});
  p[kProj1W] = Tensor<T>({ph, c3});
  p[kProj1B] = Tensor<T>({ph});
  p[kProj2W] = Tensor<T>({d, ph});
  p[kProj2B] = Tensor<T>({d});
  p[kPred1W] = Tensor<T>({qh, d});
  p[kPred1B] = Tensor<T>({qh});
  p[kPred2W] = Tensor<T>({d, qh});
  p[kPred2B] = Tensor<T>({d});
  return p;
}

template <typename T>
ModelParams<T> init_params(const ModelSpec &spec, std::uint64_t seed) {
  ModelParams<T> p = make_params<T>(spec);
  Rng rng(derive_seed(seed, 0x696e6974));
  for (std::size_t id = 0; id < kNumParams; id += 2) {
    Tensor<T> &w = p[id];
    const std::size_t fan_in = w.size() / w.dim(0);
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (auto &v : w.data)
      v = static_cast<T>(sd * rng.normal());
  }
  return p;
}

FlopsBreakdown forward_flops_breakdown(const ModelSpec &spec, int side) {
  FlopsBreakdown f;
  int cin = spec.in_channels;
  int s = side;
  for (int c : spec.conv_channels) {
    s = conv_out_side(s);
    f.encoder += 2.0 * kTaps * cin * c * static_cast<double>(s) * s;
    cin = c;
  }
  f.projection = 2.0 * spec.conv_channels[2] * spec.proj_hidden +
                 2.0 * spec.proj_hidden * spec.embed_dim;
  f.predictor = 2.0 * spec.embed_dim * spec.pred_hidden +
                2.0 * spec.pred_hidden * spec.embed_dim;
  return f;
}

double forward_flops(const ModelSpec &spec, int side) {
  return forward_flops_breakdown(spec, side).total();
}

namespace {

template <typename T>
Tensor<T> run_encoder(const ModelParams<T> &params, const Tensor<T> &batch,
                      ForwardCache<T> *cache, double &flops) {
  static constexpr const char *kLayer[] = {"encoder.conv1", "encoder.conv2",
                                           "encoder.conv3"};
  const Tensor<T> *x = &batch;
  std::array<Tensor<T>, 3> local;
  auto &act = cache ? cache->act : local;
  for (std::size_t l = 0; l < 3; ++l) {
    act[l] = conv_forward(*x, params[kConv1W + 2 * l], params[kConv1B + 2 * l],
                          flops);
    relu_inplace(act[l]);
    check_finite(act[l], kLayer[l]);
    x = &act[l];
  }
  return global_avg_pool(act[2]);
}

} // namespace

template <typename T>
ForwardOutput<T> forward(const ModelParams<T> &params, const Tensor<T> &batch,
                         ForwardCache<T> *cache) {
  check_input(params, batch);
  const T eps = static_cast<T>(params.spec.norm_eps);
  ForwardOutput<T> out;
  double flops = 0.0;
  if (cache)
    cache->input = batch;
  out.features = run_encoder(params, batch, cache, flops);

  std::vector<T> inv1, inv2;
  Tensor<T> u1 = linear_forward(out.features, params[kProj1W], params[kProj1B], flops);
  Tensor<T> n1 = standardize_forward(u1, eps, inv1);
  Tensor<T> r1 = n1;
  relu_inplace(r1);
  check_finite(r1, "projector.fc1");
  Tensor<T> u2 = linear_forward(r1, params[kProj2W], params[kProj2B], flops);
  out.z = standardize_forward(u2, eps, inv2);
  check_finite(out.z, "projector.fc2");

  Tensor<T> q1 = linear_forward(out.z, params[kPred1W], params[kPred1B], flops);
  Tensor<T> s1 = q1;
  relu_inplace(s1);
  check_finite(s1, "predictor.fc1");
  out.p = linear_forward(s1, params[kPred2W], params[kPred2B], flops);
  check_finite(out.p, "predictor.fc2");
  out.flops = flops;

  if (cache) {
    cache->features = out.features;
    cache->proj_norm1 = std::move(n1);
    cache->proj_inv_std1 = std::move(inv1);
    cache->proj_relu1 = std::move(r1);
    cache->proj_inv_std2 = std::move(inv2);
    cache->z = out.z;
    cache->pred_hidden = std::move(q1);
    cache->pred_relu = std::move(s1);
  }
  return out;
}

template <typename T>
Tensor<T> encode(const ModelParams<T> &params, const Tensor<T> &batch) {
  check_input(params, batch);
  double flops = 0.0;
  return run_encoder<T>(params, batch, nullptr, flops);
}

template <typename T>
double backward(const ModelParams<T> &params, const ForwardCache<T> &cache,
                const Tensor<T> &grad_p,
                const std::type_identity_t<Tensor<T>> *grad_z,
                ModelParams<T> &grads) {
  // Predictor.
  Tensor<T> d_s1;
  linear_backward(cache.pred_relu, params[kPred2W], grad_p, grads[kPred2W],
                  grads[kPred2B], &d_s1);
  mask_relu(d_s1, cache.pred_relu);
  Tensor<T> d_z;
  linear_backward(cache.z, params[kPred1W], d_s1, grads[kPred1W],
                  grads[kPred1B], &d_z);
  if (grad_z) {
    check_same_shape(d_z, *grad_z, "backward grad_z");
    for (std::size_t i = 0; i < d_z.size(); ++i)
      d_z[i] += (*grad_z)[i];
  }

  // Projector.
  Tensor<T> d_u2 = standardize_backward(cache.z, cache.proj_inv_std2, d_z);
  Tensor<T> d_r1;
  linear_backward(cache.proj_relu1, params[kProj2W], d_u2, grads[kProj2W],
                  grads[kProj2B], &d_r1);
  mask_relu(d_r1, cache.proj_relu1);
  Tensor<T> d_u1 =
      standardize_backward(cache.proj_norm1, cache.proj_inv_std1, d_r1);
  Tensor<T> d_h;
  linear_backward(cache.features, params[kProj1W], d_u1, grads[kProj1W],
                  grads[kProj1B], &d_h);

  // Global average pool, then the conv stack.
  const Tensor<T> &a3 = cache.act[2];
  const std::size_t batch = a3.dim(0), ch = a3.dim(1), hw = a3.dim(2) * a3.dim(3);
  Tensor<T> d_act(a3.shape);
  const T inv_hw = T(1) / static_cast<T>(hw);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < ch; ++c) {
      const T g = d_h[b * ch + c] * inv_hw;
      T *dst = d_act.ptr() + (b * ch + c) * hw;
      std::fill(dst, dst + hw, g);
    }

  for (int l = 2; l >= 0; --l) {
    mask_relu(d_act, cache.act[static_cast<std::size_t>(l)]);
    const Tensor<T> &input = l == 0 ? cache.input : cache.act[static_cast<std::size_t>(l - 1)];
    Tensor<T> d_in;
    conv_backward(input, params[kConv1W + 2 * l], d_act, grads[kConv1W + 2 * l],
                  grads[kConv1B + 2 * l], l == 0 ? nullptr : &d_in);
    d_act = std::move(d_in);
  }

  const int side = static_cast<int>(cache.input.dim(2));
  return 2.0 * forward_flops(params.spec, side) *
         static_cast<double>(cache.input.dim(0));
}

#define FASTSSL_INSTANTIATE(T)                                                 \
  template struct ModelParams<T>;                                              \
  template ModelParams<T> make_params<T>(const ModelSpec &);                   \
  template ModelParams<T> init_params<T>(const ModelSpec &, std::uint64_t);    \
  template ForwardOutput<T> forward<T>(const ModelParams<T> &,                 \
                                       const Tensor<T> &, ForwardCache<T> *);  \
  template Tensor<T> encode<T>(const ModelParams<T> &, const Tensor<T> &);     \
  template double backward<T>(const ModelParams<T> &, const ForwardCache<T> &, \
                              const Tensor<T> &, const Tensor<T> *,            \
                              ModelParams<T> &);

FASTSSL_INSTANTIATE(float)
FASTSSL_INSTANTIATE(double)

#undef FASTSSL_INSTANTIATE

} // namespace fastssl::sim
