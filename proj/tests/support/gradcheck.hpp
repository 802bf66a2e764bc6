#pragma once

// Central finite differences against the analytic BPTT gradient.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sentcast/lstm.hpp"

namespace sentcast::testing {

struct GradCase {
	lstm::LstmModel model;
	WindowedDataset data;
	std::vector<std::size_t> batch;
};

struct GradReport {
	std::size_t parameters = 0;
	double worst_relative = 0.0;
	std::size_t worst_index = 0;
};

/// True when every relu input sits at least `margin` away from its kink
/// (cells that are exactly zero stay zero under small perturbations).
inline bool clear_of_kinks(const GradCase &gc, double margin) {
	lstm::Workspace ws;
	for (std::size_t i : gc.batch) {
		lstm::forward(gc.model, gc.data.sample(i), ws);
		for (const auto &layer : ws.layers) {
			if ((layer.z_c.array().abs() < margin).any()) {
				return false;
			}
			auto c = layer.c.rightCols(layer.c.cols() - 1).array();
			if (((c != 0.0) && (c.abs() < margin)).any()) {
				return false;
			}
		}
	}
	return true;
}

/// Small random network and batch; redrawn until clear of relu kinks. Biases
/// and the head are randomized too so no gradient is trivially zero.
inline GradCase random_grad_case(lstm::Rng &rng, double margin = 1e-3) {
	while (true) {
		GradCase gc;
		std::size_t features = 1 + rng.below(3);
		std::size_t lookback = 2 + rng.below(3);
		std::size_t samples = 1 + rng.below(3);
		std::vector<std::size_t> units(1 + rng.below(2));
		for (auto &u : units) {
			u = 1 + rng.below(3);
		}
		gc.model = lstm::init_model(features, rng.below(1u << 30), units);
		Eigen::VectorXd flat = gc.model.params.flatten();
		for (Eigen::Index k = 0; k < flat.size(); ++k) {
			flat(k) += rng.uniform(-0.5, 0.5);
		}
		gc.model.params.assign(flat);

		gc.data.lookback = lookback;
		gc.data.features = features;
		gc.data.inputs.resize(samples * lookback * features);
		for (auto &x : gc.data.inputs) {
			x = rng.uniform(0.0, 1.0);
		}
		gc.data.targets.resize(static_cast<Eigen::Index>(samples));
		for (Eigen::Index k = 0; k < gc.data.targets.size(); ++k) {
			gc.data.targets(k) = rng.uniform(0.0, 1.0);
		}
		gc.data.train_count = samples;
		gc.batch.resize(samples);
		std::iota(gc.batch.begin(), gc.batch.end(), 0);
		if (clear_of_kinks(gc, margin)) {
			return gc;
		}
	}
}

/// Relative error |a - n| / max(|a|, |n|, floor) for every parameter.
inline GradReport check_gradient(const GradCase &gc, double h = 1e-5, double floor = 1e-7) {
	lstm::Workspace ws;
	lstm::Batch batch{&gc.data, gc.batch};
	auto analytic = lstm::backward(gc.model, batch, ws).gradient.flatten();

	auto model = gc.model;
	const Eigen::VectorXd base = model.params.flatten();
	GradReport report;
	report.parameters = static_cast<std::size_t>(base.size());
	for (Eigen::Index k = 0; k < base.size(); ++k) {
		Eigen::VectorXd p = base;
		p(k) = base(k) + h;
		model.params.assign(p);
		double up = lstm::batch_loss(model, batch, ws);
		p(k) = base(k) - h;
		model.params.assign(p);
		double down = lstm::batch_loss(model, batch, ws);
		double numeric = (up - down) / (2.0 * h);
		double a = analytic(k);
		double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
		if (rel > report.worst_relative) {
			report.worst_relative = rel;
			report.worst_index = static_cast<std::size_t>(k);
		}
	}
	return report;
}

} // namespace sentcast::testing
