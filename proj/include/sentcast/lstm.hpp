#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sentcast/common.hpp"
#include "sentcast/dataset.hpp"

namespace sentcast::lstm {

/// Gate order inside the packed weight blocks.
enum class Gate : int { input = 0, forget = 1, output = 2, candidate = 3 };

inline constexpr std::array<Gate, 4> kGates{Gate::input, Gate::forget, Gate::output, Gate::candidate};

inline std::string_view to_string(Gate g) {
	switch (g) {
	case Gate::input:
		return "input";
	case Gate::forget:
		return "forget";
	case Gate::output:
		return "output";
	case Gate::candidate:
		return "candidate";
	}
	return "?";
}

/// Activation for the cell candidate and the hidden output. Gates are
/// always sigmoid.
enum class Activation { relu };

/// Thrown when training diverges.
class TrainingError : public Error {
public:
	using Error::Error;
};

/// One recurrent layer. The four gates are stacked row-wise in `kGates`
/// order: rows [k*units, (k+1)*units) of W, U and b belong to gate k.
struct LstmLayerParams {
	std::size_t units = 0;
	std::size_t in_dim = 0;
	Eigen::MatrixXd W; // 4*units x in_dim
	Eigen::MatrixXd U; // 4*units x units
	Eigen::VectorXd b; // 4*units

	LstmLayerParams() = default;
	LstmLayerParams(std::size_t units_, std::size_t in_dim_)
	    : units(units_), in_dim(in_dim_), W(Eigen::MatrixXd::Zero(4 * units_, in_dim_)),
	      U(Eigen::MatrixXd::Zero(4 * units_, units_)), b(Eigen::VectorXd::Zero(4 * units_)) {}

	auto W_gate(Gate g) {
		return W.middleRows(static_cast<int>(g) * units_i(), units_i());
	}
	auto W_gate(Gate g) const {
		return W.middleRows(static_cast<int>(g) * units_i(), units_i());
	}
	auto U_gate(Gate g) {
		return U.middleRows(static_cast<int>(g) * units_i(), units_i());
	}
	auto U_gate(Gate g) const {
		return U.middleRows(static_cast<int>(g) * units_i(), units_i());
	}
	auto b_gate(Gate g) {
		return b.segment(static_cast<int>(g) * units_i(), units_i());
	}
	auto b_gate(Gate g) const {
		return b.segment(static_cast<int>(g) * units_i(), units_i());
	}

	bool operator==(const LstmLayerParams &o) const {
		return units == o.units && in_dim == o.in_dim && W == o.W && U == o.U && b == o.b;
	}

private:
	Eigen::Index units_i() const {
		return static_cast<Eigen::Index>(units);
	}
};

/// All trainable tensors. Also used as the gradient container.
struct LstmParameters {
	std::vector<LstmLayerParams> layers;
	Eigen::RowVectorXd head_w; // 1 x last_units
	double head_b = 0.0;

	bool operator==(const LstmParameters &) const = default;

	/// Same shapes, all zeros.
	LstmParameters zeros_like() const {
		LstmParameters z;
		for (const auto &l : layers) {
			z.layers.emplace_back(l.units, l.in_dim);
		}
		z.head_w = Eigen::RowVectorXd::Zero(head_w.size());
		return z;
	}

	template <typename F>
	void for_each_tensor(F &&f) {
		for (auto &l : layers) {
			f(Eigen::Map<Eigen::VectorXd>(l.W.data(), l.W.size()));
			f(Eigen::Map<Eigen::VectorXd>(l.U.data(), l.U.size()));
			f(Eigen::Map<Eigen::VectorXd>(l.b.data(), l.b.size()));
		}
		f(Eigen::Map<Eigen::VectorXd>(head_w.data(), head_w.size()));
		f(Eigen::Map<Eigen::VectorXd>(&head_b, 1));
	}

	std::size_t size() const {
		std::size_t n = static_cast<std::size_t>(head_w.size()) + 1;
		for (const auto &l : layers) {
			n += static_cast<std::size_t>(l.W.size() + l.U.size() + l.b.size());
		}
		return n;
	}

	Eigen::VectorXd flatten() const {
		Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
		Eigen::Index pos = 0;
		const_cast<LstmParameters *>(this)->for_each_tensor([&](Eigen::Map<Eigen::VectorXd> t) {
			out.segment(pos, t.size()) = t;
			pos += t.size();
		});
		return out;
	}

	void assign(const Eigen::VectorXd &flat) {
		if (static_cast<std::size_t>(flat.size()) != size()) {
			throw InputError("parameter vector has " + std::to_string(flat.size()) + " entries, model has " +
			                 std::to_string(size()));
		}
		Eigen::Index pos = 0;
		for_each_tensor([&](Eigen::Map<Eigen::VectorXd> t) {
			t = flat.segment(pos, t.size());
			pos += t.size();
		});
	}
};

struct LstmModel {
	LstmParameters params;
	std::size_t feature_count = 0;
	Activation activation = Activation::relu;
	std::uint64_t seed = 0;

	std::vector<std::size_t> units() const {
		std::vector<std::size_t> u;
		for (const auto &l : params.layers) {
			u.push_back(l.units);
		}
		return u;
	}

	bool operator==(const LstmModel &) const = default;
};

inline const std::vector<std::size_t> kDefaultUnits{10, 5, 5};

/// Deterministic uniform doubles from a standard-specified engine, so weights
/// depend on the seed only.
class Rng {
public:
	explicit Rng(std::uint64_t seed) : engine_(seed) {}

	double uniform01() {
		return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
	}

	double uniform(double lo, double hi) {
		return lo + (hi - lo) * uniform01();
	}

	double normal() {
		// Box-Muller; avoids implementation-defined std::normal_distribution.
		double u1 = uniform01();
		double u2 = uniform01();
		if (u1 < 1e-300) {
			u1 = 1e-300;
		}
		return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
	}

	std::size_t below(std::size_t n) {
		return static_cast<std::size_t>(engine_() % n);
	}

	template <typename T>
	void shuffle(std::vector<T> &v) {
		for (std::size_t i = v.size(); i > 1; --i) {
			std::swap(v[i - 1], v[below(i)]);
		}
	}

private:
	std::mt19937_64 engine_;
};

/// Glorot-uniform weights per gate matrix, zero biases except the forget
/// gate (ones).
inline LstmModel init_model(std::size_t feature_count, std::uint64_t seed,
                            const std::vector<std::size_t> &units = kDefaultUnits) {
	if (feature_count == 0) {
		throw InputError("init_model: feature_count must be >= 1");
	}
	if (units.empty()) {
		throw InputError("init_model: at least one layer required");
	}
	LstmModel model;
	model.feature_count = feature_count;
	model.seed = seed;
	Rng rng(seed);
	auto fill = [&](auto &&block, double fan_in, double fan_out) {
		double limit = std::sqrt(6.0 / (fan_in + fan_out));
		for (Eigen::Index c = 0; c < block.cols(); ++c) {
			for (Eigen::Index r = 0; r < block.rows(); ++r) {
				block(r, c) = rng.uniform(-limit, limit);
			}
		}
	};
	std::size_t in_dim = feature_count;
	for (std::size_t u : units) {
		if (u == 0) {
			throw InputError("init_model: layer units must be positive");
		}
		LstmLayerParams layer(u, in_dim);
		for (Gate g : kGates) {
			fill(layer.W_gate(g), static_cast<double>(in_dim), static_cast<double>(u));
			fill(layer.U_gate(g), static_cast<double>(u), static_cast<double>(u));
		}
		layer.b_gate(Gate::forget).setOnes();
		model.params.layers.push_back(std::move(layer));
		in_dim = u;
	}
	model.params.head_w = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(in_dim));
	fill(model.params.head_w, static_cast<double>(in_dim), 1.0);
	model.params.head_b = 0.0;
	return model;
}

namespace detail {

inline double sigmoid(double z) {
	return 1.0 / (1.0 + std::exp(-z));
}

inline double act(double z) {
	return z > 0.0 ? z : 0.0;
}

/// Subgradient at 0 is 0.
inline double act_grad(double z) {
	return z > 0.0 ? 1.0 : 0.0;
}

/// Per-layer activations of one forward pass. Column t holds timestep t;
/// c and h carry an extra leading zero column for the initial state.
struct LayerCache {
	Eigen::MatrixXd x;     // in_dim x T
	Eigen::MatrixXd gates; // 4u x T: sigmoid(i,f,o), act(candidate)
	Eigen::MatrixXd z_c;   // u x T: candidate pre-activation
	Eigen::MatrixXd c;     // u x (T+1)
	Eigen::MatrixXd h;     // u x (T+1)
};

} // namespace detail

/// Scratch buffers reused across samples.
struct Workspace {
	std::vector<detail::LayerCache> layers;
	Eigen::VectorXd z;
	Eigen::MatrixXd dH;
	Eigen::MatrixXd dX;
	Eigen::VectorXd dh_next, dc_next, dz, dh, dc;
};

namespace detail {

inline void forward_layer(const LstmLayerParams &p, LayerCache &cache, Eigen::VectorXd &z) {
	const auto T = cache.x.cols();
	const auto u = static_cast<Eigen::Index>(p.units);
	cache.gates.resize(4 * u, T);
	cache.z_c.resize(u, T);
	cache.c.setZero(u, T + 1);
	cache.h.setZero(u, T + 1);
	z.resize(4 * u);
	for (Eigen::Index t = 0; t < T; ++t) {
		z.noalias() = p.W * cache.x.col(t);
		z.noalias() += p.U * cache.h.col(t);
		z += p.b;
		for (Eigen::Index k = 0; k < 3 * u; ++k) {
			cache.gates(k, t) = sigmoid(z(k));
		}
		for (Eigen::Index k = 0; k < u; ++k) {
			cache.z_c(k, t) = z(3 * u + k);
			cache.gates(3 * u + k, t) = act(z(3 * u + k));
		}
		for (Eigen::Index k = 0; k < u; ++k) {
			double i = cache.gates(k, t);
			double f = cache.gates(u + k, t);
			double o = cache.gates(2 * u + k, t);
			double g = cache.gates(3 * u + k, t);
			double c = f * cache.c(k, t) + i * g;
			cache.c(k, t + 1) = c;
			cache.h(k, t + 1) = o * act(c);
		}
	}
}

} // namespace detail

inline void check_window_shape(const LstmModel &model, Eigen::Index rows, Eigen::Index cols) {
	if (rows == 0 || cols != static_cast<Eigen::Index>(model.feature_count)) {
		throw InputError("window shape " + std::to_string(rows) + "x" + std::to_string(cols) +
		                 " does not match model features " + std::to_string(model.feature_count));
	}
}

/// Runs every layer over the window (timesteps x features) and returns the
/// head output for the final hidden state. Layer caches stay in `ws`.
template <typename Derived>
double forward(const LstmModel &model, const Eigen::MatrixBase<Derived> &window, Workspace &ws) {
	check_window_shape(model, window.rows(), window.cols());
	const auto &layers = model.params.layers;
	ws.layers.resize(layers.size());
	ws.layers[0].x = window.transpose();
	for (std::size_t l = 0; l < layers.size(); ++l) {
		if (l > 0) {
			const auto &prev = ws.layers[l - 1].h;
			ws.layers[l].x = prev.rightCols(prev.cols() - 1);
		}
		detail::forward_layer(layers[l], ws.layers[l], ws.z);
	}
	const auto &top = ws.layers.back().h;
	return model.params.head_w.dot(top.col(top.cols() - 1)) + model.params.head_b;
}

template <typename Derived>
double forward(const LstmModel &model, const Eigen::MatrixBase<Derived> &window) {
	Workspace ws;
	return forward(model, window, ws);
}

namespace detail {

/// Accumulates parameter gradients for one layer given dL/dh_t for every
/// timestep (columns of dH) and writes dL/dx_t into dX.
inline void backward_layer(const LstmLayerParams &p, const LayerCache &cache, const Eigen::MatrixXd &dH,
                           LstmLayerParams &grad, Eigen::MatrixXd &dX, Workspace &ws) {
	const auto T = cache.x.cols();
	const auto u = static_cast<Eigen::Index>(p.units);
	dX.setZero(cache.x.rows(), T);
	ws.dh_next.setZero(u);
	ws.dc_next.setZero(u);
	ws.dz.resize(4 * u);
	ws.dh.resize(u);
	ws.dc.resize(u);
	for (Eigen::Index t = T - 1; t >= 0; --t) {
		ws.dh = dH.col(t) + ws.dh_next;
		for (Eigen::Index k = 0; k < u; ++k) {
			double i = cache.gates(k, t);
			double f = cache.gates(u + k, t);
			double o = cache.gates(2 * u + k, t);
			double g = cache.gates(3 * u + k, t);
			double c = cache.c(k, t + 1);
			double c_prev = cache.c(k, t);
			double dh = ws.dh(k);
			double dc = dh * o * act_grad(c) + ws.dc_next(k);
			ws.dz(k) = dc * g * i * (1.0 - i);
			ws.dz(u + k) = dc * c_prev * f * (1.0 - f);
			ws.dz(2 * u + k) = dh * act(c) * o * (1.0 - o);
			ws.dz(3 * u + k) = dc * i * act_grad(cache.z_c(k, t));
			ws.dc_next(k) = dc * f;
		}
		grad.W.noalias() += ws.dz * cache.x.col(t).transpose();
		grad.U.noalias() += ws.dz * cache.h.col(t).transpose();
		grad.b += ws.dz;
		dX.col(t).noalias() = p.W.transpose() * ws.dz;
		ws.dh_next.noalias() = p.U.transpose() * ws.dz;
	}
}

} // namespace detail

/// Adds d(loss)/d(params) for one sample to `grad`, where the caller supplies
/// d(loss)/d(prediction). Requires a preceding forward() with the same `ws`.
inline void backward_sample(const LstmModel &model, double d_prediction, LstmParameters &grad, Workspace &ws) {
	const auto &layers = model.params.layers;
	const auto &top = ws.layers.back().h;
	const auto T = top.cols() - 1;
	grad.head_w += d_prediction * top.col(T).transpose();
	grad.head_b += d_prediction;

	ws.dH.setZero(static_cast<Eigen::Index>(layers.back().units), T);
	ws.dH.col(T - 1) = d_prediction * model.params.head_w.transpose();
	for (std::size_t l = layers.size(); l-- > 0;) {
		detail::backward_layer(layers[l], ws.layers[l], ws.dH, grad.layers[l], ws.dX, ws);
		if (l > 0) {
			ws.dH.swap(ws.dX);
		}
	}
}

/// A mini-batch: sample indices into a windowed dataset.
struct Batch {
	const WindowedDataset *data = nullptr;
	std::span<const std::size_t> indices;
};

struct LossAndGradient {
	double loss = 0.0; // mean squared error over the batch
	LstmParameters gradient;
};

/// Exact gradient of the batch MSE by backpropagation through time.
inline LossAndGradient backward(const LstmModel &model, const Batch &batch, Workspace &ws) {
	if (batch.data == nullptr || batch.indices.empty()) {
		throw InputError("backward: empty batch");
	}
	LossAndGradient out{0.0, model.params.zeros_like()};
	const double n = static_cast<double>(batch.indices.size());
	for (std::size_t idx : batch.indices) {
		double pred = forward(model, batch.data->sample(idx), ws);
		double residual = pred - batch.data->targets(static_cast<Eigen::Index>(idx));
		out.loss += residual * residual / n;
		backward_sample(model, 2.0 * residual / n, out.gradient, ws);
	}
	return out;
}

inline LossAndGradient backward(const LstmModel &model, const Batch &batch) {
	Workspace ws;
	return backward(model, batch, ws);
}

inline double batch_loss(const LstmModel &model, const Batch &batch, Workspace &ws) {
	double loss = 0.0;
	const double n = static_cast<double>(batch.indices.size());
	for (std::size_t idx : batch.indices) {
		double r = forward(model, batch.data->sample(idx), ws) - batch.data->targets(static_cast<Eigen::Index>(idx));
		loss += r * r / n;
	}
	return loss;
}

// ---------------------------------------------------------------------------
// Training

enum class Optimizer { adam };
enum class Loss { mse };

struct TrainConfig {
	std::size_t epochs = 100;
	std::size_t batch_size = 5;
	double learning_rate = 0.001;
	Optimizer optimizer = Optimizer::adam;
	Loss loss = Loss::mse;
	double beta1 = 0.9;
	double beta2 = 0.999;
	double adam_epsilon = 1e-8;
	double clip_norm = 5.0; // global gradient norm; <= 0 disables
	std::uint64_t seed = 0; // batch shuffling

	void validate() const {
		if (epochs == 0) {
			throw ConfigError("train config: epochs must be positive");
		}
		if (batch_size == 0) {
			throw ConfigError("train config: batch_size must be positive");
		}
		if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
			throw ConfigError("train config: learning_rate must be a positive finite number");
		}
	}

	nlohmann::json to_json() const {
		return {{"epochs", epochs},       {"batch_size", batch_size},     {"learning_rate", learning_rate},
		        {"optimizer", "adam"},    {"loss", "mse"},                {"beta1", beta1},
		        {"beta2", beta2},         {"adam_epsilon", adam_epsilon}, {"clip_norm", clip_norm},
		        {"seed", seed}};
	}

	static TrainConfig from_json(const nlohmann::json &j) {
		TrainConfig c;
		c.epochs = j.value("epochs", c.epochs);
		c.batch_size = j.value("batch_size", c.batch_size);
		c.learning_rate = j.value("learning_rate", c.learning_rate);
		c.beta1 = j.value("beta1", c.beta1);
		c.beta2 = j.value("beta2", c.beta2);
		c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
		c.clip_norm = j.value("clip_norm", c.clip_norm);
		c.seed = j.value("seed", c.seed);
		if (j.value("optimizer", std::string("adam")) != "adam") {
			throw ConfigError("train config: only the adam optimizer is supported");
		}
		if (j.value("loss", std::string("mse")) != "mse") {
			throw ConfigError("train config: only the mse loss is supported");
		}
		return c;
	}
};

class Adam {
public:
	Adam(std::size_t n, const TrainConfig &cfg)
	    : m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))), v_(m_), cfg_(cfg) {}

	void step(Eigen::VectorXd &params, const Eigen::VectorXd &grad) {
		++t_;
		m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
		v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
		double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
		double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
		double lr = cfg_.learning_rate * std::sqrt(bc2) / bc1;
		params.array() -= lr * m_.array() / (v_.array().sqrt() + cfg_.adam_epsilon);
	}

private:
	Eigen::VectorXd m_;
	Eigen::VectorXd v_;
	TrainConfig cfg_;
	std::uint64_t t_ = 0;
};

/// Rescales g in place so its Euclidean norm is at most max_norm.
inline void clip_global_norm(Eigen::VectorXd &g, double max_norm) {
	if (max_norm <= 0.0) {
		return;
	}
	double norm = g.norm();
	if (norm > max_norm) {
		g *= max_norm / norm;
	}
}

struct TrainResult {
	LstmModel model;
	std::vector<double> loss_history; // mean per-sample training loss, one per epoch
};

/// Mini-batch Adam over the training samples of `data`. The sample order is
/// reshuffled every epoch from `config.seed`.
inline TrainResult train(LstmModel model, const WindowedDataset &data, const TrainConfig &config) {
	config.validate();
	if (data.train_count == 0) {
		throw InputError("train: dataset has no training samples");
	}
	check_window_shape(model, static_cast<Eigen::Index>(data.lookback), static_cast<Eigen::Index>(data.features));

	TrainResult result;
	result.loss_history.reserve(config.epochs);
	Rng rng(mix64(config.seed ^ 0x5ca1ab1eULL));
	std::vector<std::size_t> order(data.train_count);
	for (std::size_t i = 0; i < order.size(); ++i) {
		order[i] = i;
	}
	Adam adam(model.params.size(), config);
	Workspace ws;
	Eigen::VectorXd flat = model.params.flatten();

	for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
		rng.shuffle(order);
		double epoch_loss = 0.0;
		for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
			std::size_t len = std::min(config.batch_size, order.size() - start);
			Batch batch{&data, std::span<const std::size_t>(order).subspan(start, len)};
			auto lg = backward(model, batch, ws);
			if (!std::isfinite(lg.loss)) {
				throw TrainingError("training diverged at epoch " + std::to_string(epoch + 1) +
				                    " (non-finite loss); lower learning_rate (currently " +
				                    std::to_string(config.learning_rate) + ") or tighten clip_norm");
			}
			epoch_loss += lg.loss * static_cast<double>(len);
			Eigen::VectorXd g = lg.gradient.flatten();
			clip_global_norm(g, config.clip_norm);
			adam.step(flat, g);
			model.params.assign(flat);
		}
		result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
	}
	result.model = std::move(model);
	return result;
}

/// Iterated one-step forecast. Each prediction becomes the close of a new
/// row appended to the window; the other features repeat the last observed
/// row. `last_window` is in scaled units; the returned closes are in price
/// units.
template <typename Derived>
std::vector<double> predict_horizon(const LstmModel &model, const Eigen::MatrixBase<Derived> &last_window,
                                    const ScalerParams &scaler, std::size_t horizon = kDefaultHorizon) {
	WindowMatrix window = last_window;
	check_window_shape(model, window.rows(), window.cols());
	std::vector<double> out;
	out.reserve(horizon);
	Workspace ws;
	for (std::size_t step = 0; step < horizon; ++step) {
		double scaled = forward(model, window, ws);
		out.push_back(scaler.invert(0, scaled));
		if (window.rows() > 1) {
			Eigen::RowVectorXd next = window.row(window.rows() - 1);
			next(0) = scaled;
			WindowMatrix shifted = window.bottomRows(window.rows() - 1);
			window.topRows(window.rows() - 1) = shifted;
			window.row(window.rows() - 1) = next;
		} else {
			window(0, 0) = scaled;
		}
	}
	return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json tensor_json(const Eigen::MatrixXd &m) {
	std::vector<double> data;
	data.reserve(static_cast<std::size_t>(m.size()));
	for (Eigen::Index r = 0; r < m.rows(); ++r) {
		for (Eigen::Index c = 0; c < m.cols(); ++c) {
			data.push_back(m(r, c));
		}
	}
	return {{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

inline void read_tensor(const nlohmann::json &j, const std::string &name, Eigen::MatrixXd &m) {
	const auto &t = j.at(name);
	auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
	auto data = t.at("data").get<std::vector<double>>();
	if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols() ||
	    data.size() != static_cast<std::size_t>(m.size())) {
		throw InputError("checkpoint tensor '" + name + "' has the wrong shape");
	}
	for (Eigen::Index r = 0; r < m.rows(); ++r) {
		for (Eigen::Index c = 0; c < m.cols(); ++c) {
			m(r, c) = data[static_cast<std::size_t>(r * m.cols() + c)];
		}
	}
}

} // namespace detail

/// Checkpoint document: format tag, version, seed, architecture, optional
/// train config, and every tensor by name with its shape (row-major data).
inline nlohmann::json checkpoint_json(const LstmModel &model, const TrainConfig *config = nullptr) {
	nlohmann::json tensors = nlohmann::json::object();
	for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
		const auto &layer = model.params.layers[l];
		auto prefix = "layer" + std::to_string(l) + ".";
		for (Gate g : kGates) {
			auto gate = std::string(to_string(g));
			tensors[prefix + "W_" + gate] = detail::tensor_json(layer.W_gate(g));
			tensors[prefix + "U_" + gate] = detail::tensor_json(layer.U_gate(g));
			tensors[prefix + "b_" + gate] = detail::tensor_json(layer.b_gate(g));
		}
	}
	tensors["head.w"] = detail::tensor_json(model.params.head_w);
	tensors["head.b"] = detail::tensor_json(Eigen::MatrixXd::Constant(1, 1, model.params.head_b));
	nlohmann::json j = {{"format", "sentcast-lstm"},
	                    {"version", kCheckpointVersion},
	                    {"seed", model.seed},
	                    {"feature_count", model.feature_count},
	                    {"units", model.units()},
	                    {"activation", "relu"},
	                    {"tensors", tensors}};
	if (config != nullptr) {
		j["train_config"] = config->to_json();
	}
	return j;
}

inline LstmModel model_from_checkpoint(const nlohmann::json &j) {
	if (j.value("format", std::string{}) != "sentcast-lstm") {
		throw InputError("not a sentcast-lstm checkpoint");
	}
	if (j.at("version").get<int>() != kCheckpointVersion) {
		throw InputError("unsupported checkpoint version " + j.at("version").dump());
	}
	if (j.value("activation", std::string("relu")) != "relu") {
		throw InputError("unsupported activation in checkpoint");
	}
	LstmModel model;
	model.seed = j.at("seed").get<std::uint64_t>();
	model.feature_count = j.at("feature_count").get<std::size_t>();
	const auto &tensors = j.at("tensors");
	std::size_t in_dim = model.feature_count;
	auto units = j.at("units").get<std::vector<std::size_t>>();
	for (std::size_t l = 0; l < units.size(); ++l) {
		LstmLayerParams layer(units[l], in_dim);
		auto prefix = "layer" + std::to_string(l) + ".";
		for (Gate g : kGates) {
			auto gate = std::string(to_string(g));
			Eigen::MatrixXd w(layer.W_gate(g).rows(), layer.W_gate(g).cols());
			Eigen::MatrixXd u(layer.U_gate(g).rows(), layer.U_gate(g).cols());
			Eigen::MatrixXd b(layer.b_gate(g).size(), 1);
			detail::read_tensor(tensors, prefix + "W_" + gate, w);
			detail::read_tensor(tensors, prefix + "U_" + gate, u);
			detail::read_tensor(tensors, prefix + "b_" + gate, b);
			layer.W_gate(g) = w;
			layer.U_gate(g) = u;
			layer.b_gate(g) = b.col(0);
		}
		model.params.layers.push_back(std::move(layer));
		in_dim = units[l];
	}
	Eigen::MatrixXd head_w(1, static_cast<Eigen::Index>(in_dim));
	Eigen::MatrixXd head_b(1, 1);
	detail::read_tensor(tensors, "head.w", head_w);
	detail::read_tensor(tensors, "head.b", head_b);
	model.params.head_w = head_w.row(0);
	model.params.head_b = head_b(0, 0);
	return model;
}

} // namespace sentcast::lstm
