#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sleepkit/nn/tensor.hpp"

namespace sleepkit::nn {

enum class Mode { Infer, Train };

using Rng = std::mt19937_64;

template <typename Real>
struct ParamRef {
    std::string name;
    Tensor<Real>* value;
    Tensor<Real>* grad;
};

template <typename Real>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng& rng) = 0;
    // Returns dL/dx; accumulates weight gradients. Requires a preceding
    // forward in Train mode.
    virtual Tensor<Real> backward(const Tensor<Real>& dy) = 0;
    virtual void collect_params(std::vector<ParamRef<Real>>& out) { (void)out; }
    virtual void zero_grads() {}
};

namespace detail {
inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InternalError(msg);
}
}  // namespace detail

// 1-D convolution over [T x Cin] -> [T x Cout], stride 1, zero "same"
// padding, optional dilation. Weight layout [k x Cin x Cout] keeps the
// output-channel loop contiguous.
template <typename Real>
class Conv1d : public Layer<Real> {
public:
    Conv1d(std::string name, std::size_t in_ch, std::size_t out_ch, int kernel, int dilation = 1)
        : name_(std::move(name)),
          in_(in_ch),
          out_(out_ch),
          k_(kernel),
          d_(dilation),
          w_({static_cast<std::size_t>(kernel), in_ch, out_ch}),
          b_({out_ch}),
          gw_(w_.shape),
          gb_(b_.shape) {}

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng&) override {
        detail::require(x.shape.size() == 2 && x.shape[1] == in_,
                        name_ + ": expected [T x " + std::to_string(in_) + "], got " + x.shape_str());
        const long T = static_cast<long>(x.shape[0]);
        Tensor<Real> y({x.shape[0], out_});
        const int c = k_ / 2;
        for (long t = 0; t < T; ++t) {
            Real* yr = y.row(static_cast<std::size_t>(t));
            for (int j = 0; j < k_; ++j) {
                const long s = t + static_cast<long>(j - c) * d_;
                if (s < 0 || s >= T) continue;
                const Real* xr = x.row(static_cast<std::size_t>(s));
                const Real* wj = w_.data.data() + static_cast<std::size_t>(j) * in_ * out_;
                for (std::size_t ci = 0; ci < in_; ++ci) {
                    const Real xv = xr[ci];
                    const Real* wc = wj + ci * out_;
                    for (std::size_t co = 0; co < out_; ++co) yr[co] += xv * wc[co];
                }
            }
            for (std::size_t co = 0; co < out_; ++co) yr[co] += b_.data[co];
        }
        if (mode == Mode::Train) x_ = x;
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& dy) override {
        const long T = static_cast<long>(x_.shape[0]);
        detail::require(dy.shape.size() == 2 && static_cast<long>(dy.shape[0]) == T &&
                            dy.shape[1] == out_,
                        name_ + ": bad upstream gradient shape " + dy.shape_str());
        Tensor<Real> dx(x_.shape);
        const int c = k_ / 2;
        for (long t = 0; t < T; ++t) {
            const Real* dyr = dy.row(static_cast<std::size_t>(t));
            for (std::size_t co = 0; co < out_; ++co) gb_.data[co] += dyr[co];
            for (int j = 0; j < k_; ++j) {
                const long s = t + static_cast<long>(j - c) * d_;
                if (s < 0 || s >= T) continue;
                const Real* xr = x_.row(static_cast<std::size_t>(s));
                Real* dxr = dx.row(static_cast<std::size_t>(s));
                const Real* wj = w_.data.data() + static_cast<std::size_t>(j) * in_ * out_;
                Real* gwj = gw_.data.data() + static_cast<std::size_t>(j) * in_ * out_;
                for (std::size_t ci = 0; ci < in_; ++ci) {
                    const Real xv = xr[ci];
                    const Real* wc = wj + ci * out_;
                    Real* gwc = gwj + ci * out_;
                    Real acc = 0;
                    for (std::size_t co = 0; co < out_; ++co) {
                        gwc[co] += xv * dyr[co];
                        acc += wc[co] * dyr[co];
                    }
                    dxr[ci] += acc;
                }
            }
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef<Real>>& out) override {
        out.push_back({name_ + "/w", &w_, &gw_});
        out.push_back({name_ + "/b", &b_, &gb_});
    }
    void zero_grads() override {
        gw_.fill(0);
        gb_.fill(0);
    }

    Tensor<Real>& weights() { return w_; }
    Tensor<Real>& bias() { return b_; }

private:
    std::string name_;
    std::size_t in_, out_;
    int k_, d_;
    Tensor<Real> w_, b_, gw_, gb_, x_;
};

template <typename Real>
class Dense : public Layer<Real> {
public:
    Dense(std::string name, std::size_t in, std::size_t out)
        : name_(std::move(name)), in_(in), out_(out), w_({in, out}), b_({out}), gw_(w_.shape), gb_(b_.shape) {}

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng&) override {
        detail::require(x.shape.size() == 2 && x.shape[1] == in_,
                        name_ + ": expected [L x " + std::to_string(in_) + "], got " + x.shape_str());
        Tensor<Real> y({x.shape[0], out_});
        for (std::size_t r = 0; r < x.shape[0]; ++r) {
            const Real* xr = x.row(r);
            Real* yr = y.row(r);
            for (std::size_t i = 0; i < in_; ++i) {
                const Real xv = xr[i];
                const Real* wr = w_.row(i);
                for (std::size_t o = 0; o < out_; ++o) yr[o] += xv * wr[o];
            }
            for (std::size_t o = 0; o < out_; ++o) yr[o] += b_.data[o];
        }
        if (mode == Mode::Train) x_ = x;
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Tensor<Real> dx(x_.shape);
        for (std::size_t r = 0; r < x_.shape[0]; ++r) {
            const Real* xr = x_.row(r);
            const Real* dyr = dy.row(r);
            Real* dxr = dx.row(r);
            for (std::size_t o = 0; o < out_; ++o) gb_.data[o] += dyr[o];
            for (std::size_t i = 0; i < in_; ++i) {
                const Real xv = xr[i];
                const Real* wr = w_.row(i);
                Real* gwr = gw_.row(i);
                Real acc = 0;
                for (std::size_t o = 0; o < out_; ++o) {
                    gwr[o] += xv * dyr[o];
                    acc += wr[o] * dyr[o];
                }
                dxr[i] = acc;
            }
        }
        return dx;
    }

    void collect_params(std::vector<ParamRef<Real>>& out) override {
        out.push_back({name_ + "/w", &w_, &gw_});
        out.push_back({name_ + "/b", &b_, &gb_});
    }
    void zero_grads() override {
        gw_.fill(0);
        gb_.fill(0);
    }

private:
    std::string name_;
    std::size_t in_, out_;
    Tensor<Real> w_, b_, gw_, gb_, x_;
};

template <typename Real>
class LeakyRelu : public Layer<Real> {
public:
    explicit LeakyRelu(double slope = 0.01) : slope_(static_cast<Real>(slope)) {}

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng&) override {
        Tensor<Real> y = x;
        for (auto& v : y.data) v = v > 0 ? v : slope_ * v;
        if (mode == Mode::Train) x_ = x;
        return y;
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Tensor<Real> dx = dy;
        for (std::size_t i = 0; i < dx.data.size(); ++i)
            if (x_.data[i] <= 0) dx.data[i] *= slope_;
        return dx;
    }

private:
    Real slope_;
    Tensor<Real> x_;
};

// Non-overlapping pairwise max over the time axis; argmax routing on backward.
template <typename Real>
class MaxPool2 : public Layer<Real> {
public:
    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng&) override {
        detail::require(x.shape.size() == 2, "maxpool: expected 2-D input");
        if (x.shape[0] % 2 != 0)
            throw InternalError("maxpool: odd time dimension " + std::to_string(x.shape[0]));
        const std::size_t T2 = x.shape[0] / 2, C = x.shape[1];
        Tensor<Real> y({T2, C});
        if (mode == Mode::Train) arg_.assign(T2 * C, 0);
        for (std::size_t t = 0; t < T2; ++t) {
            const Real* a = x.row(2 * t);
            const Real* b = x.row(2 * t + 1);
            Real* yr = y.row(t);
            for (std::size_t c = 0; c < C; ++c) {
                const bool second = b[c] > a[c];
                yr[c] = second ? b[c] : a[c];
                if (mode == Mode::Train) arg_[t * C + c] = second ? 1 : 0;
            }
        }
        in_shape_ = x.shape;
        return y;
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Tensor<Real> dx(in_shape_);
        const std::size_t T2 = dy.shape[0], C = dy.shape[1];
        for (std::size_t t = 0; t < T2; ++t)
            for (std::size_t c = 0; c < C; ++c)
                dx.at(2 * t + arg_[t * C + c], c) = dy.at(t, c);
        return dx;
    }

private:
    std::vector<std::uint8_t> arg_;
    std::vector<std::size_t> in_shape_;
};

template <typename Real>
class Softmax : public Layer<Real> {
public:
    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng&) override {
        Tensor<Real> y = x;
        for (std::size_t r = 0; r < x.shape[0]; ++r) {
            Real* row = y.row(r);
            Real mx = row[0];
            for (std::size_t c = 1; c < x.shape[1]; ++c) mx = std::max(mx, row[c]);
            Real sum = 0;
            for (std::size_t c = 0; c < x.shape[1]; ++c) {
                row[c] = std::exp(row[c] - mx);
                sum += row[c];
            }
            for (std::size_t c = 0; c < x.shape[1]; ++c) row[c] /= sum;
        }
        if (mode == Mode::Train) y_ = y;
        return y;
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Tensor<Real> dx(dy.shape);
        for (std::size_t r = 0; r < dy.shape[0]; ++r) {
            const Real* yr = y_.row(r);
            const Real* dyr = dy.row(r);
            Real dot = 0;
            for (std::size_t c = 0; c < dy.shape[1]; ++c) dot += dyr[c] * yr[c];
            Real* dxr = dx.row(r);
            for (std::size_t c = 0; c < dy.shape[1]; ++c) dxr[c] = yr[c] * (dyr[c] - dot);
        }
        return dx;
    }

private:
    Tensor<Real> y_;
};

// Inverted dropout with a seeded mask; identity in Infer mode.
template <typename Real>
class Dropout : public Layer<Real> {
public:
    explicit Dropout(double rate) : rate_(rate) {}

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng& rng) override {
        if (mode == Mode::Infer || rate_ <= 0.0) {
            mask_.clear();
            return x;
        }
        std::bernoulli_distribution keep(1.0 - rate_);
        const Real scale = static_cast<Real>(1.0 / (1.0 - rate_));
        Tensor<Real> y = x;
        mask_.resize(x.numel());
        for (std::size_t i = 0; i < x.numel(); ++i) {
            mask_[i] = keep(rng) ? scale : Real(0);
            y.data[i] *= mask_[i];
        }
        return y;
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        if (mask_.empty()) return dy;
        Tensor<Real> dx = dy;
        for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] *= mask_[i];
        return dx;
    }

private:
    double rate_;
    std::vector<Real> mask_;
};

// [T x C] -> [L x (T/L)*C], contiguous row-major regrouping.
template <typename Real>
class WindowReshape : public Layer<Real> {
public:
    explicit WindowReshape(std::size_t windows) : windows_(windows) {}

    Tensor<Real> forward(const Tensor<Real>& x, Mode, Rng&) override {
        detail::require(x.shape.size() == 2 && x.shape[0] % windows_ == 0,
                        "window reshape: " + x.shape_str() + " not divisible into " +
                            std::to_string(windows_) + " windows");
        in_shape_ = x.shape;
        Tensor<Real> y = x;
        y.shape = {windows_, x.shape[0] / windows_ * x.shape[1]};
        return y;
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Tensor<Real> dx = dy;
        dx.shape = in_shape_;
        return dx;
    }

private:
    std::size_t windows_;
    std::vector<std::size_t> in_shape_;
};

// Appends a fixed per-record vector (demographics) to every row.
template <typename Real>
class ConcatVec : public Layer<Real> {
public:
    explicit ConcatVec(std::size_t width) : width_(width), values_(width, Real(0)) {}

    void set_values(const std::vector<Real>& v) {
        detail::require(v.size() == width_, "concat: demographic vector size mismatch");
        values_ = v;
    }
    std::size_t width() const { return width_; }

    Tensor<Real> forward(const Tensor<Real>& x, Mode, Rng&) override {
        if (width_ == 0) return x;
        Tensor<Real> y({x.shape[0], x.shape[1] + width_});
        for (std::size_t r = 0; r < x.shape[0]; ++r) {
            Real* yr = y.row(r);
            const Real* xr = x.row(r);
            std::copy(xr, xr + x.shape[1], yr);
            std::copy(values_.begin(), values_.end(), yr + x.shape[1]);
        }
        cols_ = x.shape[1];
        return y;
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        if (width_ == 0) return dy;
        Tensor<Real> dx({dy.shape[0], cols_});
        for (std::size_t r = 0; r < dy.shape[0]; ++r)
            std::copy(dy.row(r), dy.row(r) + cols_, dx.row(r));
        return dx;
    }

private:
    std::size_t width_, cols_ = 0;
    std::vector<Real> values_;
};

// ResConv block: three k-sized convolutions with LeakyReLU, max pooling, and
// a 1x1-conv + pool shortcut added residually. Output has half the input
// length and `filters` channels.
template <typename Real>
class ResConvBlock : public Layer<Real> {
public:
    ResConvBlock(const std::string& name, std::size_t in_ch, std::size_t filters, int kernel,
                 double leaky)
        : conv1_(name + "/conv1", in_ch, filters, kernel),
          conv2_(name + "/conv2", filters, filters, kernel),
          conv3_(name + "/conv3", filters, filters, kernel),
          sc_(name + "/sc", in_ch, filters, 1),
          act1_(leaky),
          act2_(leaky),
          act3_(leaky) {}

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng& rng) override {
        Tensor<Real> h = act1_.forward(conv1_.forward(x, mode, rng), mode, rng);
        h = act2_.forward(conv2_.forward(h, mode, rng), mode, rng);
        h = act3_.forward(conv3_.forward(h, mode, rng), mode, rng);
        Tensor<Real> m = pool_main_.forward(h, mode, rng);
        Tensor<Real> s = pool_sc_.forward(sc_.forward(x, mode, rng), mode, rng);
        for (std::size_t i = 0; i < m.numel(); ++i) m.data[i] += s.data[i];
        return m;
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Tensor<Real> dmain = conv1_.backward(
            act1_.backward(conv2_.backward(act2_.backward(conv3_.backward(
                act3_.backward(pool_main_.backward(dy)))))));
        Tensor<Real> dsc = sc_.backward(pool_sc_.backward(dy));
        for (std::size_t i = 0; i < dmain.numel(); ++i) dmain.data[i] += dsc.data[i];
        return dmain;
    }
    void collect_params(std::vector<ParamRef<Real>>& out) override {
        conv1_.collect_params(out);
        conv2_.collect_params(out);
        conv3_.collect_params(out);
        sc_.collect_params(out);
    }
    void zero_grads() override {
        conv1_.zero_grads();
        conv2_.zero_grads();
        conv3_.zero_grads();
        sc_.zero_grads();
    }

private:
    Conv1d<Real> conv1_, conv2_, conv3_, sc_;
    LeakyRelu<Real> act1_, act2_, act3_;
    MaxPool2<Real> pool_main_, pool_sc_;
};

// TCN block: a stack of dilated convolutions with LeakyReLU, a residual
// shortcut from the block input (1x1 conv when channel counts differ), then
// dropout.
template <typename Real>
class TcnBlock : public Layer<Real> {
public:
    TcnBlock(const std::string& name, std::size_t in_ch, std::size_t filters, int kernel,
             const std::vector<int>& dilations, double leaky, double dropout)
        : drop_(dropout) {
        std::size_t ch = in_ch;
        int idx = 1;
        for (int d : dilations) {
            convs_.emplace_back(name + "/conv" + std::to_string(idx++), ch, filters, kernel, d);
            acts_.emplace_back(leaky);
            ch = filters;
        }
        if (in_ch != filters)
            sc_ = std::make_unique<Conv1d<Real>>(name + "/sc", in_ch, filters, 1);
    }

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng& rng) override {
        Tensor<Real> h = x;
        for (std::size_t i = 0; i < convs_.size(); ++i)
            h = acts_[i].forward(convs_[i].forward(h, mode, rng), mode, rng);
        Tensor<Real> r = sc_ ? sc_->forward(x, mode, rng) : x;
        for (std::size_t i = 0; i < h.numel(); ++i) h.data[i] += r.data[i];
        return drop_.forward(h, mode, rng);
    }
    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Tensor<Real> d = drop_.backward(dy);
        Tensor<Real> dx_res = sc_ ? sc_->backward(d) : d;
        Tensor<Real> dh = d;
        for (std::size_t i = convs_.size(); i-- > 0;)
            dh = convs_[i].backward(acts_[i].backward(dh));
        for (std::size_t i = 0; i < dh.numel(); ++i) dh.data[i] += dx_res.data[i];
        return dh;
    }
    void collect_params(std::vector<ParamRef<Real>>& out) override {
        for (auto& c : convs_) c.collect_params(out);
        if (sc_) sc_->collect_params(out);
    }
    void zero_grads() override {
        for (auto& c : convs_) c.zero_grads();
        if (sc_) sc_->zero_grads();
    }

private:
    std::vector<Conv1d<Real>> convs_;
    std::vector<LeakyRelu<Real>> acts_;
    std::unique_ptr<Conv1d<Real>> sc_;
    Dropout<Real> drop_;
};

// Applies an inner layer stack to each row of [L x Tw*Cin], treating the row
// as a [Tw x Cin] window; per-window outputs are re-flattened into rows.
// Backward re-runs the window forward to restore the inner caches, so the
// inner stack must be deterministic (no dropout).
template <typename Real>
class TimeDistributed : public Layer<Real> {
public:
    TimeDistributed(std::size_t window_len, std::size_t in_ch)
        : tw_(window_len), cin_(in_ch) {}

    void add(std::unique_ptr<Layer<Real>> l) { inner_.push_back(std::move(l)); }

    Tensor<Real> forward(const Tensor<Real>& x, Mode mode, Rng& rng) override {
        detail::require(x.shape.size() == 2 && x.shape[1] == tw_ * cin_,
                        "time-distributed: row width " + x.shape_str() + " != " +
                            std::to_string(tw_ * cin_));
        const std::size_t L = x.shape[0];
        Tensor<Real> out;
        for (std::size_t l = 0; l < L; ++l) {
            Tensor<Real> win({tw_, cin_});
            std::copy(x.row(l), x.row(l) + tw_ * cin_, win.data.begin());
            for (auto& layer : inner_) win = layer->forward(win, Mode::Infer, rng);
            if (l == 0) out = Tensor<Real>({L, win.numel()});
            detail::require(win.numel() == out.shape[1], "time-distributed: ragged window output");
            std::copy(win.data.begin(), win.data.end(), out.row(l));
        }
        if (mode == Mode::Train) x_ = x;
        return out;
    }

    Tensor<Real> backward(const Tensor<Real>& dy) override {
        Rng rng(0);
        const std::size_t L = x_.shape[0];
        Tensor<Real> dx(x_.shape);
        for (std::size_t l = 0; l < L; ++l) {
            Tensor<Real> win({tw_, cin_});
            std::copy(x_.row(l), x_.row(l) + tw_ * cin_, win.data.begin());
            for (auto& layer : inner_) win = layer->forward(win, Mode::Train, rng);
            Tensor<Real> g({win.shape[0], win.shape[1]});
            std::copy(dy.row(l), dy.row(l) + g.numel(), g.data.begin());
            for (std::size_t i = inner_.size(); i-- > 0;) g = inner_[i]->backward(g);
            std::copy(g.data.begin(), g.data.end(), dx.row(l));
        }
        return dx;
    }
    void collect_params(std::vector<ParamRef<Real>>& out) override {
        for (auto& l : inner_) l->collect_params(out);
    }
    void zero_grads() override {
        for (auto& l : inner_) l->zero_grads();
    }

private:
    std::size_t tw_, cin_;
    std::vector<std::unique_ptr<Layer<Real>>> inner_;
    Tensor<Real> x_;
};

// Bidirectional LSTM, inference only. Gate order i,f,g,o; output is
// [L x 2H], forward-direction state first.
template <typename Real>
class BiLstm : public Layer<Real> {
public:
    BiLstm(std::string name, std::size_t in, std::size_t hidden)
        : name_(std::move(name)),
          in_(in),
          h_(hidden),
          wx_f_({in, 4 * hidden}),
          wh_f_({hidden, 4 * hidden}),
          b_f_({4 * hidden}),
          wx_b_({in, 4 * hidden}),
          wh_b_({hidden, 4 * hidden}),
          b_b_({4 * hidden}) {}

    Tensor<Real> forward(const Tensor<Real>& x, Mode, Rng&) override {
        detail::require(x.shape.size() == 2 && x.shape[1] == in_,
                        name_ + ": expected [L x " + std::to_string(in_) + "], got " + x.shape_str());
        const std::size_t L = x.shape[0];
        Tensor<Real> y({L, 2 * h_});
        run_direction(x, wx_f_, wh_f_, b_f_, false, y, 0);
        run_direction(x, wx_b_, wh_b_, b_b_, true, y, h_);
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>&) override {
        throw InternalError(name_ + ": BiLSTM backward is not supported (inference-only layer)");
    }

    void collect_params(std::vector<ParamRef<Real>>& out) override {
        out.push_back({name_ + "/fw/wx", &wx_f_, nullptr});
        out.push_back({name_ + "/fw/wh", &wh_f_, nullptr});
        out.push_back({name_ + "/fw/b", &b_f_, nullptr});
        out.push_back({name_ + "/bw/wx", &wx_b_, nullptr});
        out.push_back({name_ + "/bw/wh", &wh_b_, nullptr});
        out.push_back({name_ + "/bw/b", &b_b_, nullptr});
    }

private:
    static Real sigmoid(Real v) { return Real(1) / (Real(1) + std::exp(-v)); }

    void run_direction(const Tensor<Real>& x, const Tensor<Real>& wx, const Tensor<Real>& wh,
                       const Tensor<Real>& b, bool reverse, Tensor<Real>& y,
                       std::size_t offset) {
        const std::size_t L = x.shape[0];
        std::vector<Real> h(h_, 0), c(h_, 0), gates(4 * h_);
        for (std::size_t step = 0; step < L; ++step) {
            const std::size_t t = reverse ? L - 1 - step : step;
            std::copy(b.data.begin(), b.data.end(), gates.begin());
            const Real* xr = x.row(t);
            for (std::size_t i = 0; i < in_; ++i) {
                const Real xv = xr[i];
                const Real* wr = wx.row(i);
                for (std::size_t g = 0; g < 4 * h_; ++g) gates[g] += xv * wr[g];
            }
            for (std::size_t i = 0; i < h_; ++i) {
                const Real hv = h[i];
                const Real* wr = wh.row(i);
                for (std::size_t g = 0; g < 4 * h_; ++g) gates[g] += hv * wr[g];
            }
            for (std::size_t i = 0; i < h_; ++i) {
                const Real ig = sigmoid(gates[i]);
                const Real fg = sigmoid(gates[h_ + i]);
                const Real gg = std::tanh(gates[2 * h_ + i]);
                const Real og = sigmoid(gates[3 * h_ + i]);
                c[i] = fg * c[i] + ig * gg;
                h[i] = og * std::tanh(c[i]);
                y.at(t, offset + i) = h[i];
            }
        }
    }

    std::string name_;
    std::size_t in_, h_;
    Tensor<Real> wx_f_, wh_f_, b_f_, wx_b_, wh_b_, b_b_;
};

}  // namespace sleepkit::nn
