#include "saem/driver.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "saem/errors.hpp"

namespace saem {

void SaemConfig::validate() const {
  if (n_iterations < 1) throw ConfigError("n_iterations must be >= 1");
  if (mcmc_steps_per_iter < 1) throw ConfigError("mcmc_steps_per_iter must be >= 1");
  if (initial_burn_in < 0) throw ConfigError("initial_burn_in must be >= 0");
  gamma.validate(n_iterations);
  if (!exact_estep) kernel.validate();
}

SufficientStats sa_update(const SufficientStats& s, const SufficientStats& stat,
                          double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw DomainError("sa_update requires gamma in (0, 1]");
  if (s.size() != stat.size())
    throw DomainError("sa_update dimension mismatch");
  SufficientStats next = (1.0 - gamma) * s + gamma * stat;
  if (!next.allFinite())
    throw DivergenceError("sufficient statistics left the finite region", 0);
  return next;
}

namespace {

// Per-unit chain bookkeeping for one SAEM run.
struct UnitChains {
  std::vector<KernelState> states;
  std::vector<RngStream> rngs;
  std::vector<int> offsets;  // block offset of each unit in the full latent
};

UnitChains make_chains(const Model& model, const Latent& z0, const KernelConfig& kernel,
                       const RngStream& master) {
  UnitChains chains;
  const int units = model.n_units();
  chains.offsets.resize(units + 1, 0);
  for (int u = 0; u < units; ++u)
    chains.offsets[u + 1] = chains.offsets[u] + model.unit_dim(u);
  if (chains.offsets[units] != model.latent_dim())
    throw DomainError("unit dimensions do not sum to the latent dimension");
  for (int u = 0; u < units; ++u) {
    Vector block = z0.segment(chains.offsets[u], model.unit_dim(u));
    chains.states.push_back(make_kernel_state(std::move(block), kernel));
    chains.rngs.push_back(master.split(0x10000ull + static_cast<std::uint64_t>(u)));
  }
  return chains;
}

Latent gather(const UnitChains& chains) {
  const int total = chains.offsets.back();
  Latent z(total);
  for (std::size_t u = 0; u < chains.states.size(); ++u)
    z.segment(chains.offsets[u], chains.states[u].position.size()) =
        chains.states[u].position;
  return z;
}

// Advances every unit chain n_steps at fixed parameters; returns accepted and
// proposed counts for the sweep.
std::pair<long, long> advance_chains(const Model& model, UnitChains& chains,
                                     const Params& theta, const KernelConfig& kernel,
                                     long n_steps) {
  long accepted = 0, proposed = 0;
  for (std::size_t u = 0; u < chains.states.size(); ++u) {
    auto posterior = model.unit_posterior(static_cast<int>(u), theta);
    TargetDensity target{
        [&](const Vector& z) { return posterior->log_density(z); },
        [&](const Vector& z) { return posterior->grad_log_density(z); }};
    KernelState& state = chains.states[u];
    const long acc0 = state.accept_count, prop0 = state.proposal_count;
    for (long step = 0; step < n_steps; ++step) {
      if (kernel.adjusted) {
        const double alpha = mala_step(state, target, kernel, chains.rngs[u]);
        adapt_stepsize(state, alpha, kernel);
      } else {
        ula_step(state, target, kernel, chains.rngs[u]);
      }
    }
    accepted += state.accept_count - acc0;
    proposed += state.proposal_count - prop0;
  }
  return {accepted, proposed};
}

}  // namespace

Trace run_saem(const Model& model, const SaemConfig& cfg, const SaemInit& init) {
  cfg.validate();
  if (init.theta0.has_value() == init.s0.has_value())
    throw ConfigError("run_saem needs exactly one of theta0 or s0");

  RngStream master(cfg.seed);
  RngStream init_rng = master.split(1);

  bool clamped = false;
  Params theta = init.s0 ? model.m_step(*init.s0, &clamped) : *init.theta0;
  if (theta.size() != model.param_dim())
    throw ConfigError("theta0 dimension does not match the model");

  Latent z = init.z0 ? *init.z0 : model.initial_latent(theta, init_rng);
  if (z.size() != model.latent_dim())
    throw ConfigError("z0 dimension does not match the model");
  if (!z.allFinite()) throw DomainError("initial latent state must be finite");

  KernelConfig kernel = cfg.kernel;
  if (cfg.model_preconditioner)
    kernel.preconditioner = model.dynamic_preconditioner(theta);

  Trace trace;
  if (cfg.record_trace)
    trace.records.reserve(static_cast<std::size_t>(cfg.n_iterations));

  RngStream exact_rng = master.split(2);
  UnitChains chains = make_chains(model, z, kernel, master);

  // Initial burn-in at the starting parameters.
  if (!cfg.exact_estep && cfg.initial_burn_in > 0) {
    try {
      advance_chains(model, chains, theta, kernel, cfg.initial_burn_in);
    } catch (const DivergenceError& err) {
      trace.status = RunStatus::Diverged;
      trace.diverged_at = 0;
      trace.divergence_message = std::string("burn-in: ") + err.what();
      trace.final_latent = gather(chains);
      trace.final_theta = theta;
      trace.final_s = init.s0 ? *init.s0 : SufficientStats();
      return trace;
    }
    z = gather(chains);
  }

  SufficientStats s = init.s0 ? *init.s0 : model.suff_stats(z);

  double accept_sum = 0.0;
  long recorded = 0;
  for (long k = 1; k <= cfg.n_iterations; ++k) {
    const double gamma = cfg.gamma.at(k);
    double accept_rate = 1.0;
    try {
      if (cfg.exact_estep) {
        z = model.sample_exact_posterior(theta, exact_rng);
        for (std::size_t u = 0; u < chains.states.size(); ++u)
          chains.states[u].position = z.segment(chains.offsets[u],
                                                chains.states[u].position.size());
      } else {
        auto [accepted, proposed] =
            advance_chains(model, chains, theta, kernel, cfg.mcmc_steps_per_iter);
        accept_rate = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
        z = gather(chains);
      }
      s = sa_update(s, model.suff_stats(z), gamma);
    } catch (const DivergenceError& err) {
      trace.status = RunStatus::Diverged;
      trace.diverged_at = k;
      trace.divergence_message = err.what();
      break;
    }

    theta = model.m_step(s, &clamped);
    if (cfg.model_preconditioner) {
      kernel.preconditioner = model.dynamic_preconditioner(theta);
      for (auto& state : chains.states) {
        if (state.position.size() != kernel.preconditioner->size())
          throw DomainError("dynamic preconditioner dimension mismatch");
      }
    }

    accept_sum += accept_rate;
    ++recorded;
    if (cfg.record_trace) {
      TraceRecord rec;
      rec.k = k;
      rec.gamma = gamma;
      rec.accept_rate = accept_rate;
      rec.theta = model.to_natural(theta);
      rec.s = s;
      rec.m_step_clamped = clamped;
      if (model.has_exact_posterior())
        rec.h_norm = mean_field_residual(model, s).norm();
      trace.records.push_back(std::move(rec));
    }
  }

  trace.final_latent = gather(chains);
  trace.final_theta = theta;
  trace.final_s = s;
  trace.mean_accept_rate = recorded > 0 ? accept_sum / recorded : 0.0;
  return trace;
}

std::vector<ReplicateRun> run_replicates(
    const std::function<std::shared_ptr<const Model>(int replicate, RngStream& rng)>&
        make_model,
    const SaemConfig& cfg, const SaemInit& init, int n_replicates, int n_workers) {
  if (n_replicates < 1) throw ConfigError("n_replicates must be >= 1");
  if (n_workers < 1) n_workers = 1;

  RngStream master(cfg.seed);
  std::vector<ReplicateRun> runs(static_cast<std::size_t>(n_replicates));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= n_replicates || failed.load()) return;
      try {
        RngStream replicate_rng = master.split(0x52000ull + static_cast<std::uint64_t>(r));
        auto model = make_model(r, replicate_rng);
        SaemConfig replicate_cfg = cfg;
        replicate_cfg.seed = replicate_rng.split(1).seed();
        ReplicateRun run;
        run.replicate = r;
        run.seed = replicate_cfg.seed;
        run.trace = run_saem(*model, replicate_cfg, init);
        runs[static_cast<std::size_t>(r)] = std::move(run);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed = true;
        failure = e.what();
        return;
      }
    }
  };

  if (n_workers == 1 || n_replicates == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    const int count = std::min(n_workers, n_replicates);
    threads.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failed) throw DataError("replicate batch failed: " + failure);
  return runs;
}

void write_trace_csv(const Trace& trace, const std::string& path,
                     const std::vector<std::string>& param_names,
                     const std::vector<std::string>& metadata) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open trace output file: " + path);
  out.precision(17);
  for (const auto& line : metadata) out << "# " << line << "\n";
  if (trace.diverged())
    out << "# status=diverged-at-" << trace.diverged_at << "\n";
  else
    out << "# status=completed\n";

  if (!param_names.empty()) {
    out << "# params=";
    for (std::size_t i = 0; i < param_names.size(); ++i)
      out << (i ? "," : "") << param_names[i];
    out << "\n";
  }

  out << "k,gamma,accept_rate";
  const std::size_t d_theta =
      trace.records.empty() ? param_names.size() : trace.records[0].theta.size();
  for (std::size_t i = 0; i < d_theta; ++i) out << ",theta_" << (i + 1);
  const std::size_t d_s = trace.records.empty() ? 0 : trace.records[0].s.size();
  for (std::size_t i = 0; i < d_s; ++i) out << ",s_" << (i + 1);
  out << ",h_norm\n";

  for (const auto& rec : trace.records) {
    out << rec.k << ',' << rec.gamma << ',' << rec.accept_rate;
    for (Eigen::Index i = 0; i < rec.theta.size(); ++i) out << ',' << rec.theta[i];
    for (Eigen::Index i = 0; i < rec.s.size(); ++i) out << ',' << rec.s[i];
    out << ',';
    if (rec.h_norm) out << *rec.h_norm;
    out << '\n';
  }
}

}  // namespace saem
