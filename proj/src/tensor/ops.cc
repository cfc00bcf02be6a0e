// Copyright 2026 The Hydra Rank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hydra/tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hydra/error.h"

namespace hydra::tensor {
namespace {

Tape& TapeOf(Var a) {
  if (!a.valid()) throw Error(ErrorCode::kInvalidArgument, "unbound Var");
  return *a.tape();
}

void RequireSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.SameShape(b)) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " and " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

template <typename Fn>
Matrix Map(const Matrix& a, Fn fn) {
  Matrix out(a.rows(), a.cols());
  for (int64_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
  return out;
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Var MatMul(Var a, Var b) {
  Tape& t = TapeOf(a);
  Matrix out = tensor::MatMul(a.value(), b.value());
  return t.Record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) {
      MatMulAccumulate(g, t.value(b), t.GradBuffer(a), false, true);
    }
    if (t.requires_grad(b)) {
      MatMulAccumulate(t.value(a), g, t.GradBuffer(b), true, false);
    }
  });
}

Var Add(Var a, Var b) {
  Tape& t = TapeOf(a);
  RequireSameShape(a.value(), b.value(), "Add");
  Matrix out = a.value();
  out += b.value();
  return t.Record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.AccumulateGrad(a, g);
    t.AccumulateGrad(b, g);
  });
}

Var Sub(Var a, Var b) {
  Tape& t = TapeOf(a);
  RequireSameShape(a.value(), b.value(), "Sub");
  Matrix out = a.value();
  const Matrix& bv = b.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return t.Record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.AccumulateGrad(a, g);
    if (t.requires_grad(b)) {
      Matrix& gb = t.GradBuffer(b);
      for (int64_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var Mul(Var a, Var b) {
  Tape& t = TapeOf(a);
  RequireSameShape(a.value(), b.value(), "Mul");
  Matrix out = a.value();
  const Matrix& bv = b.value();
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return t.Record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) {
      Matrix& ga = t.GradBuffer(a);
      const Matrix& bv = t.value(b);
      for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      Matrix& gb = t.GradBuffer(b);
      const Matrix& av = t.value(a);
      for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var Scale(Var a, double factor) {
  Tape& t = TapeOf(a);
  Matrix out = a.value();
  out *= factor;
  return t.Record(std::move(out), {a}, [a, factor](Tape& t, const Matrix& g) {
    Matrix& ga = t.GradBuffer(a);
    for (int64_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var AddRowBroadcast(Var x, Var row) {
  Tape& t = TapeOf(x);
  const Matrix& xv = x.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != xv.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "AddRowBroadcast: bad row shape");
  }
  Matrix out = xv;
  for (int64_t i = 0; i < out.rows(); ++i) {
    double* o = out.row(i);
    for (int64_t j = 0; j < out.cols(); ++j) o[j] += rv[j];
  }
  return t.Record(std::move(out), {x, row}, [x, row](Tape& t, const Matrix& g) {
    t.AccumulateGrad(x, g);
    if (t.requires_grad(row)) {
      Matrix& gr = t.GradBuffer(row);
      for (int64_t i = 0; i < g.rows(); ++i) {
        const double* gi = g.row(i);
        for (int64_t j = 0; j < g.cols(); ++j) gr[j] += gi[j];
      }
    }
  });
}

Var RowSoftmax(Var a) {
  Tape& t = TapeOf(a);
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (int64_t i = 0; i < av.rows(); ++i) {
    const double* in = av.row(i);
    double* o = out.row(i);
    const double mx = *std::max_element(in, in + av.cols());
    double total = 0.0;
    for (int64_t j = 0; j < av.cols(); ++j) {
      o[j] = std::exp(in[j] - mx);
      total += o[j];
    }
    for (int64_t j = 0; j < av.cols(); ++j) o[j] /= total;
  }
  Matrix y = out;
  return t.Record(std::move(out), {a},
                  [a, y = std::move(y)](Tape& t, const Matrix& g) {
                    Matrix& ga = t.GradBuffer(a);
                    for (int64_t i = 0; i < g.rows(); ++i) {
                      const double* gi = g.row(i);
                      const double* yi = y.row(i);
                      double dot = 0.0;
                      for (int64_t j = 0; j < g.cols(); ++j) dot += gi[j] * yi[j];
                      double* o = ga.row(i);
                      for (int64_t j = 0; j < g.cols(); ++j) {
                        o[j] += yi[j] * (gi[j] - dot);
                      }
                    }
                  });
}

Var LayerNorm(Var x, Var gain, Var bias, double eps) {
  Tape& t = TapeOf(x);
  const Matrix& xv = x.value();
  const int64_t n = xv.cols();
  if (gain.value().rows() != 1 || gain.value().cols() != n ||
      bias.value().rows() != 1 || bias.value().cols() != n) {
    throw Error(ErrorCode::kShapeMismatch, "LayerNorm: bad gain/bias shape");
  }
  Matrix xhat(xv.rows(), n);
  std::vector<double> inv_std(static_cast<size_t>(xv.rows()));
  Matrix out(xv.rows(), n);
  const Matrix& gv = gain.value();
  const Matrix& bv = bias.value();
  for (int64_t i = 0; i < xv.rows(); ++i) {
    const double* in = xv.row(i);
    double mean = 0.0;
    for (int64_t j = 0; j < n; ++j) mean += in[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (int64_t j = 0; j < n; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(i)] = is;
    double* h = xhat.row(i);
    double* o = out.row(i);
    for (int64_t j = 0; j < n; ++j) {
      h[j] = (in[j] - mean) * is;
      o[j] = h[j] * gv[j] + bv[j];
    }
  }
  return t.Record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape& t, const Matrix& g) {
        const int64_t n = g.cols();
        const Matrix& gv = t.value(gain);
        if (t.requires_grad(gain) || t.requires_grad(bias)) {
          Matrix dg(1, n), db(1, n);
          for (int64_t i = 0; i < g.rows(); ++i) {
            for (int64_t j = 0; j < n; ++j) {
              dg[j] += g(i, j) * xhat(i, j);
              db[j] += g(i, j);
            }
          }
          t.AccumulateGrad(gain, dg);
          t.AccumulateGrad(bias, db);
        }
        if (!t.requires_grad(x)) return;
        Matrix& gx = t.GradBuffer(x);
        std::vector<double> dh(static_cast<size_t>(n));
        for (int64_t i = 0; i < g.rows(); ++i) {
          double mean_dh = 0.0, mean_dh_h = 0.0;
          for (int64_t j = 0; j < n; ++j) {
            dh[j] = g(i, j) * gv[j];
            mean_dh += dh[j];
            mean_dh_h += dh[j] * xhat(i, j);
          }
          mean_dh /= static_cast<double>(n);
          mean_dh_h /= static_cast<double>(n);
          const double is = inv_std[static_cast<size_t>(i)];
          for (int64_t j = 0; j < n; ++j) {
            gx(i, j) += is * (dh[j] - mean_dh - xhat(i, j) * mean_dh_h);
          }
        }
      });
}

Var Gelu(Var a) {
  Tape& t = TapeOf(a);
  Matrix out = Map(a.value(), [](double x) {
    return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  });
  return t.Record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    Matrix& ga = t.GradBuffer(a);
    const Matrix& av = t.value(a);
    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    for (int64_t i = 0; i < g.size(); ++i) {
      const double x = av[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
      ga[i] += g[i] * (cdf + x * pdf);
    }
  });
}

Var Silu(Var a) {
  Tape& t = TapeOf(a);
  Matrix out = Map(a.value(), [](double x) { return x * Sigmoid(x); });
  return t.Record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    Matrix& ga = t.GradBuffer(a);
    const Matrix& av = t.value(a);
    for (int64_t i = 0; i < g.size(); ++i) {
      const double s = Sigmoid(av[i]);
      ga[i] += g[i] * s * (1.0 + av[i] * (1.0 - s));
    }
  });
}

Var Embedding(Var table, std::span<const int64_t> ids) {
  Tape& t = TapeOf(table);
  const Matrix& tv = table.value();
  Matrix out(static_cast<int64_t>(ids.size()), tv.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tv.rows()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "Embedding: id " + std::to_string(ids[i]) + " out of range");
    }
    std::copy_n(tv.row(ids[i]), tv.cols(), out.row(static_cast<int64_t>(i)));
  }
  std::vector<int64_t> idx(ids.begin(), ids.end());
  return t.Record(std::move(out), {table},
                  [table, idx = std::move(idx)](Tape& t, const Matrix& g) {
                    Matrix& gt = t.GradBuffer(table);
                    for (size_t i = 0; i < idx.size(); ++i) {
                      const double* gi = g.row(static_cast<int64_t>(i));
                      double* o = gt.row(idx[i]);
                      for (int64_t j = 0; j < g.cols(); ++j) o[j] += gi[j];
                    }
                  });
}

Var Sum(Var a) {
  Tape& t = TapeOf(a);
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  Matrix out(1, 1, total);
  return t.Record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    Matrix& ga = t.GradBuffer(a);
    for (int64_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
  });
}

Var CrossEntropy(Var logits, std::span<const int64_t> targets) {
  Tape& t = TapeOf(logits);
  const Matrix& lv = logits.value();
  if (static_cast<int64_t>(targets.size()) != lv.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "CrossEntropy: one target per row");
  }
  Matrix probs(lv.rows(), lv.cols());
  double total = 0.0;
  int64_t count = 0;
  for (int64_t i = 0; i < lv.rows(); ++i) {
    const int64_t target = targets[static_cast<size_t>(i)];
    if (target < 0) continue;
    if (target >= lv.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "CrossEntropy: target out of range");
    }
    const double* in = lv.row(i);
    double* p = probs.row(i);
    const double mx = *std::max_element(in, in + lv.cols());
    double z = 0.0;
    for (int64_t j = 0; j < lv.cols(); ++j) {
      p[j] = std::exp(in[j] - mx);
      z += p[j];
    }
    for (int64_t j = 0; j < lv.cols(); ++j) p[j] /= z;
    total += mx + std::log(z) - in[target];
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorCode::kEmptyInput, "CrossEntropy: every target ignored");
  }
  std::vector<int64_t> tg(targets.begin(), targets.end());
  Matrix out(1, 1, total / static_cast<double>(count));
  return t.Record(std::move(out), {logits},
                  [logits, probs = std::move(probs), tg = std::move(tg),
                   count](Tape& t, const Matrix& g) {
                    Matrix& gl = t.GradBuffer(logits);
                    const double scale = g[0] / static_cast<double>(count);
                    for (int64_t i = 0; i < probs.rows(); ++i) {
                      const int64_t target = tg[static_cast<size_t>(i)];
                      if (target < 0) continue;
                      const double* p = probs.row(i);
                      double* o = gl.row(i);
                      for (int64_t j = 0; j < probs.cols(); ++j) o[j] += scale * p[j];
                      o[target] -= scale;
                    }
                  });
}

Var MeanSquaredError(Var pred, const Matrix& target) {
  Tape& t = TapeOf(pred);
  const Matrix& pv = pred.value();
  RequireSameShape(pv, target, "MeanSquaredError");
  Matrix diff(pv.rows(), pv.cols());
  double total = 0.0;
  for (int64_t i = 0; i < pv.size(); ++i) {
    diff[i] = pv[i] - target[i];
    total += diff[i] * diff[i];
  }
  const double n = static_cast<double>(pv.size());
  Matrix out(1, 1, total / n);
  return t.Record(std::move(out), {pred},
                  [pred, diff = std::move(diff), n](Tape& t, const Matrix& g) {
                    Matrix& gp = t.GradBuffer(pred);
                    const double scale = 2.0 * g[0] / n;
                    for (int64_t i = 0; i < diff.size(); ++i) gp[i] += scale * diff[i];
                  });
}

Var Attention(Var q, Var k, Var v, const AttentionShape& shape) {
  Tape& t = TapeOf(q);
  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  const Matrix& vv = v.value();
  const int64_t T = shape.seq_len;
  const int64_t H = shape.heads;
  if (T < 1 || H < 1 || shape.batch < 1 || qv.rows() != shape.batch * T ||
      qv.cols() % H != 0 || !qv.SameShape(kv) || !qv.SameShape(vv)) {
    throw Error(ErrorCode::kShapeMismatch, "Attention: inconsistent shapes");
  }
  const int64_t dh = qv.cols() / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  // probs holds one T x T block per (sequence, head), stacked by rows.
  Matrix probs(shape.batch * H * T, T);
  Matrix out(qv.rows(), qv.cols());
  for (int64_t b = 0; b < shape.batch; ++b) {
    for (int64_t h = 0; h < H; ++h) {
      const int64_t c0 = h * dh;
      for (int64_t i = 0; i < T; ++i) {
        const int64_t qi = b * T + i;
        double* p = probs.row((b * H + h) * T + i);
        const int64_t visible = shape.causal ? i + 1 : T;
        double mx = -INFINITY;
        for (int64_t j = 0; j < visible; ++j) {
          double s = 0.0;
          for (int64_t c = 0; c < dh; ++c) s += qv(qi, c0 + c) * kv(b * T + j, c0 + c);
          p[j] = s * scale;
          mx = std::max(mx, p[j]);
        }
        double z = 0.0;
        for (int64_t j = 0; j < visible; ++j) {
          p[j] = std::exp(p[j] - mx);
          z += p[j];
        }
        for (int64_t j = 0; j < visible; ++j) p[j] /= z;
        for (int64_t j = 0; j < visible; ++j) {
          for (int64_t c = 0; c < dh; ++c) out(qi, c0 + c) += p[j] * vv(b * T + j, c0 + c);
        }
      }
    }
  }
  return t.Record(
      std::move(out), {q, k, v},
      [q, k, v, shape, dh, scale, probs = std::move(probs)](Tape& t,
                                                           const Matrix& g) {
        const Matrix& qv = t.value(q);
        const Matrix& kv = t.value(k);
        const Matrix& vv = t.value(v);
        const int64_t T = shape.seq_len;
        const int64_t H = shape.heads;
        Matrix dq(qv.rows(), qv.cols()), dk(qv.rows(), qv.cols()),
            dv(qv.rows(), qv.cols());
        std::vector<double> dp(static_cast<size_t>(T));
        for (int64_t b = 0; b < shape.batch; ++b) {
          for (int64_t h = 0; h < H; ++h) {
            const int64_t c0 = h * dh;
            for (int64_t i = 0; i < T; ++i) {
              const int64_t qi = b * T + i;
              const double* p = probs.row((b * H + h) * T + i);
              const int64_t visible = shape.causal ? i + 1 : T;
              double dot = 0.0;
              for (int64_t j = 0; j < visible; ++j) {
                const int64_t kj = b * T + j;
                double s = 0.0;
                for (int64_t c = 0; c < dh; ++c) {
                  s += g(qi, c0 + c) * vv(kj, c0 + c);
                  dv(kj, c0 + c) += p[j] * g(qi, c0 + c);
                }
                dp[j] = s;
                dot += s * p[j];
              }
              for (int64_t j = 0; j < visible; ++j) {
                const int64_t kj = b * T + j;
                const double ds = p[j] * (dp[j] - dot) * scale;
                for (int64_t c = 0; c < dh; ++c) {
                  dq(qi, c0 + c) += ds * kv(kj, c0 + c);
                  dk(kj, c0 + c) += ds * qv(qi, c0 + c);
                }
              }
            }
          }
        }
        t.AccumulateGrad(q, dq);
        t.AccumulateGrad(k, dk);
        t.AccumulateGrad(v, dv);
      });
}

Var SegmentMean(Var x, int64_t seq_len) {
  Tape& t = TapeOf(x);
  const Matrix& xv = x.value();
  if (seq_len < 1 || xv.rows() % seq_len != 0) {
    throw Error(ErrorCode::kShapeMismatch, "SegmentMean: rows not divisible");
  }
  const int64_t batch = xv.rows() / seq_len;
  Matrix out(batch, xv.cols());
  for (int64_t i = 0; i < xv.rows(); ++i) {
    for (int64_t j = 0; j < xv.cols(); ++j) out(i / seq_len, j) += xv(i, j);
  }
  out *= 1.0 / static_cast<double>(seq_len);
  return t.Record(std::move(out), {x}, [x, seq_len](Tape& t, const Matrix& g) {
    Matrix& gx = t.GradBuffer(x);
    const double inv = 1.0 / static_cast<double>(seq_len);
    for (int64_t i = 0; i < gx.rows(); ++i) {
      for (int64_t j = 0; j < gx.cols(); ++j) gx(i, j) += g(i / seq_len, j) * inv;
    }
  });
}

}  // namespace hydra::tensor
