#include "adascale/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "adascale/acceptance.hpp"
#include "adascale/analysis.hpp"
#include "adascale/errors.hpp"
#include "adascale/gain.hpp"
#include "adascale/stats.hpp"

namespace adascale::cli {

namespace fs = std::filesystem;

namespace {

std::ostream& out_of(const CommandOptions& o) { return o.out ? *o.out : std::cout; }
std::ostream& err_of(const CommandOptions& o) { return o.err ? *o.err : std::cerr; }

std::string num(double x) { return fmt::format("{:.17g}", x); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw ConfigError(fmt::format("output directory '{}' is not writable", dir.string()));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  f << text;
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
}

struct TrainOutcome {
  std::vector<Trace> traces;  // rows dropped after writing
  SampleStats final_F;
  SampleStats iterations;
  std::size_t diverged = 0;
};

// Runs every seed, writes one trace CSV per seed and the summary.
TrainOutcome train_into(const TrainConfig& base, const ExperimentSpec& spec, const fs::path& dir,
                        ThreadPool& pool) {
  base.validate();
  ensure_dir(dir);
  const auto obj = make_objective(base.objective);
  TrainOutcome res;
  res.traces.resize(spec.seeds.size());
  pool.parallel_for(spec.seeds.size(), [&](std::size_t i) {
    TrainConfig c = base;
    c.seed = spec.seeds[i];
    Trace tr = run(*obj, c);
    std::ostringstream csv;
    write_trace_csv(csv, tr);
    write_file(dir / fmt::format("trace_seed{}.csv", c.seed), csv.str());
    tr.rows.clear();
    tr.rows.shrink_to_fit();
    res.traces[i] = std::move(tr);
  });

  std::vector<double> F, T;
  for (const auto& tr : res.traces) {
    if (tr.diverged) ++res.diverged;
    F.push_back(tr.final_F);
    T.push_back(static_cast<double>(tr.iterations));
  }
  res.final_F = summarize(F);
  res.iterations = summarize(T);

  ExperimentSpec echo = spec;
  echo.train = base;
  echo.sweep.reset();
  echo.out_dir = dir;
  const bool na = res.diverged > 0;
  std::string s = "# adascale run summary\n";
  s += fmt::format("status = {}\n", na ? "diverged" : "ok");
  s += fmt::format("runs = {}\n", res.traces.size());
  s += fmt::format("diverged = {}\n", res.diverged);
  s += fmt::format("final_F.mean = {}\n", na ? "N/A" : num(res.final_F.mean));
  s += fmt::format("final_F.std = {}\n", na ? "N/A" : num(res.final_F.stddev));
  s += fmt::format("iterations.mean = {}\n", num(res.iterations.mean));
  s += fmt::format("iterations.std = {}\n", num(res.iterations.stddev));
  for (const auto& tr : res.traces) {
    s += fmt::format("seed.{}.final_F = {}\n", tr.seed, tr.diverged ? "N/A" : num(tr.final_F));
    s += fmt::format("seed.{}.iterations = {}\n", tr.seed, tr.iterations);
    s += fmt::format("seed.{}.diverged = {}\n", tr.seed, tr.diverged ? "true" : "false");
  }
  s += "# config\n";
  std::istringstream cfg(serialize_spec(echo));
  for (std::string line; std::getline(cfg, line);) s += "config." + line + "\n";
  write_atomically(dir / "summary.txt", s);
  return res;
}

template <class F>
int guarded(const CommandOptions& opts, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err_of(opts) << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapabilityError& e) {
    err_of(opts) << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err_of(opts) << "config error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace

void write_atomically(const fs::path& path, std::string_view text) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, std::string(text));
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw ConfigError(fmt::format("cannot write '{}': {}", path.string(), ec.message()));
}

int cmd_train(const ExperimentSpec& spec, const CommandOptions& opts) {
  return guarded(opts, [&] {
    spec.validate();
    ThreadPool pool(opts.threads);
    const auto res = train_into(spec.train, spec, spec.out_dir, pool);
    out_of(opts) << fmt::format("{} runs, {} diverged; final F mean {} ; iterations mean {}\n",
                                res.traces.size(), res.diverged,
                                res.diverged ? "N/A" : num(res.final_F.mean),
                                num(res.iterations.mean));
    return int{kSuccess};
  });
}

int cmd_sweep(const ExperimentSpec& spec, const CommandOptions& opts) {
  return guarded(opts, [&] {
    if (!spec.sweep) throw ConfigError("sweep needs a sweep.axis");
    spec.validate();
    const SweepAxis& axis = *spec.sweep;
    ThreadPool pool(opts.threads);
    ensure_dir(spec.out_dir);

    std::vector<TrainConfig> points;
    switch (axis.kind) {
      case SweepKind::S:
        for (int S : axis.S) {
          TrainConfig c = spec.train;
          c.S = S;
          points.push_back(c);
        }
        break;
      case SweepKind::theta:
        for (const auto& th : axis.theta) {
          TrainConfig c = spec.train;
          c.gain.theta = eval_theta(th, spec.train.S);
          points.push_back(c);
        }
        break;
      case SweepKind::lr_grid:
        for (double eta0 : axis.eta0)
          for (double d : axis.d) {
            TrainConfig c = spec.train;
            c.schedule.eta0 = eta0;
            c.schedule.d = d;
            points.push_back(c);
          }
        break;
    }
    for (const auto& p : points) p.validate();

    std::string matrix = std::string(kMatrixHeader) + "\n";
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto& c = points[k];
      const auto res = train_into(c, spec, spec.out_dir / fmt::format("point_{}", k), pool);
      const bool na = res.diverged > 0;
      const double theta = c.gain.theta.value_or(default_theta(c.S));
      matrix += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", k, c.S, num(theta),
                            num(c.schedule.eta0), num(c.schedule.d),
                            na ? "N/A" : num(res.final_F.mean), na ? "N/A" : num(res.final_F.stddev),
                            num(res.iterations.mean), num(res.iterations.stddev), res.diverged);
      out_of(opts) << fmt::format("point {}/{} done\n", k + 1, points.size());
    }
    write_atomically(spec.out_dir / "matrix.csv", matrix);
    return int{kSuccess};
  });
}

int cmd_verify(std::string_view suite, const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto ids = acceptance::suite_criteria(suite);
    ThreadPool pool(opts.threads);
    acceptance::Context ctx(&pool);
    bool all = true;
    for (int id : ids) {
      const auto r = acceptance::run_criterion(id, ctx);
      out_of(opts) << acceptance::format_result(r) << std::endl;
      all = all && r.pass;
    }
    return int{all ? kSuccess : kFail};
  });
}

int cmd_gain_compare(const ExperimentSpec& spec, const CommandOptions& opts) {
  return guarded(opts, [&] {
    spec.validate();
    if (spec.train.algorithm != Algorithm::adascale)
      throw ConfigError("gain-compare needs run.algorithm = adascale");
    ensure_dir(spec.out_dir);
    const auto obj = make_objective(spec.train.objective);
    ThreadPool pool(opts.threads);
    pool.parallel_for(spec.seeds.size(), [&](std::size_t i) {
      TrainConfig c = spec.train;
      c.seed = spec.seeds[i];
      std::string csv = fmt::format("# seed={}\n{}\n", c.seed, kGainCompareHeader);
      RunOptions ro;
      ro.record_trace = false;
      ro.observer = [&](const IterationView& v) {
        if (v.t % spec.compare_every != 0) return;
        // Oracle batches come from a stream disjoint from training's.
        const RngStream stream(c.seed, static_cast<std::uint64_t>(v.t), 1);
        const double oracle = oracle_gain(*obj, v.w, v.S, spec.oracle_batches, stream);
        const std::string analytic =
            obj->has_analytic_moments() ? num(analytic_gain(*obj, v.w, v.S)) : "NA";
        csv += fmt::format("{},{},{},{},{}\n", v.t, num(v.tau), num(v.r), num(oracle), analytic);
      };
      run(*obj, c, ro);
      write_atomically(spec.out_dir / fmt::format("gain_compare_seed{}.csv", c.seed), csv);
    });
    out_of(opts) << fmt::format("{} comparison files written to {}\n", spec.seeds.size(),
                                spec.out_dir.string());
    return int{kSuccess};
  });
}

}  // namespace adascale::cli
