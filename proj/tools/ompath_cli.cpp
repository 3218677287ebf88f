// ompath: command-line front end for most-probable-path computations.

#include "ompath/ompath.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ompath;

namespace {

enum ExitCode : int {
  kOk = 0,
  kIoFailure = 1,
  kUsage = 2,
  kNumerical = 3,
  kNoConvergence = 4,
};

std::vector<double> parse_list(const std::string& text, std::string_view what) {
  std::vector<double> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
      throw ContractError("cannot parse " + std::string(what) + " value '" + std::string(item) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ContractError(std::string(what) + " needs at least one value");
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

json to_json_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void write_json(const fs::path& file, const json& j) { write_file_atomic(file, j.dump(2) + "\n"); }

// --- model selection -------------------------------------------------------

struct ModelFlags {
  std::string name;
  std::string a;
  std::string b;
  std::vector<std::string> params;
  bool strict = false;
};

void add_model_flags(CLI::App* sub, ModelFlags& m) {
  sub->add_option("--model", m.name, "example1 | example2 | linear_test | zero_drift");
  sub->add_option("--a", m.a, "example2 scale a (comma list allowed where noted)");
  sub->add_option("--b", m.b, "example2 scale b (default 1 when --a is given)");
  sub->add_option("--param", m.params, "extra model parameter key=value (repeatable), e.g. n=2, sigma=0")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sub->add_flag("--strict", m.strict, "treat violated regularity conditions as errors");
}

ModelParams base_params(const ModelFlags& m) {
  ModelParams p;
  for (const auto& kv : m.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ContractError("--param expects key=value, got '" + kv + "'");
    p[kv.substr(0, eq)] = parse_list(kv.substr(eq + 1), kv.substr(0, eq)).front();
  }
  return p;
}

// All (a, b) combinations requested; a single empty entry when neither is given.
std::vector<std::pair<double, double>> scale_list(const ModelFlags& m) {
  if (m.a.empty() && m.b.empty()) return {};
  const auto as = m.a.empty() ? std::vector<double>{1.0} : parse_list(m.a, "--a");
  const auto bs = m.b.empty() ? std::vector<double>{1.0} : parse_list(m.b, "--b");
  std::vector<std::pair<double, double>> out;
  for (double b : bs) {
    for (double a : as) out.emplace_back(a, b);
  }
  return out;
}

SdeModel make_model(const ModelFlags& m, std::optional<std::pair<double, double>> scale) {
  if (m.name.empty()) throw ContractError("--model is required");
  ModelParams p = base_params(m);
  if (scale) {
    p["a"] = scale->first;
    p["b"] = scale->second;
  }
  SdeModel model = builtin_model(m.name, p);
  const ConditionReport report = check_conditions(model, m.strict);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return model;
}

SdeModel make_single_model(const ModelFlags& m) {
  const auto scales = scale_list(m);
  if (scales.size() > 1) throw ContractError("this command takes a single value for --a and --b");
  return make_model(m, scales.empty() ? std::nullopt : std::optional(scales.front()));
}

json params_json(const ModelFlags& m, std::optional<std::pair<double, double>> scale) {
  json j = json::object();
  for (const auto& [k, v] : base_params(m)) j[k] = v;
  if (scale) {
    j["a"] = scale->first;
    j["b"] = scale->second;
  }
  return j;
}

Vector endpoint(const std::string& text, const SdeModel& model, std::optional<Vector> fallback,
                std::string_view flag) {
  if (text.empty()) {
    if (!fallback) throw ContractError(std::string(flag) + " is required for model " + model.name);
    return *fallback;
  }
  Vector v = to_vector(parse_list(text, flag));
  if (v.size() == 1 && model.dimension > 1) v = Vector::Constant(model.dimension, v[0]);
  if (v.size() != model.dimension) {
    throw ContractError(std::string(flag) + " has " + std::to_string(v.size()) + " components, model needs " +
                        std::to_string(model.dimension));
  }
  return v;
}

std::string scale_tag(double a, double b) { return "a" + format_double(a) + "_b" + format_double(b); }

std::string sample_name(std::size_t i) {
  std::ostringstream os;
  os << "sample_" << std::setw(4) << std::setfill('0') << i << ".csv";
  return os.str();
}

// Writes every sample of the spec as its own CSV; returns the file names.
std::vector<std::string> write_samples(const SimulationSpec& spec, const fs::path& dir) {
  const auto paths = simulate_ensemble(spec);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    names.push_back(sample_name(i));
    write_file_atomic(dir / names.back(), path_to_csv(paths[i]));
  }
  return names;
}

// --- simulate --------------------------------------------------------------

struct SimulateFlags {
  ModelFlags model;
  std::string x0;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  std::size_t samples = 1;
  std::string out_dir = ".";
};

int cmd_simulate(const SimulateFlags& f) {
  const SdeModel model = make_single_model(f.model);
  const auto ends = default_endpoints(model.name);
  const Vector x0 = endpoint(f.x0, model, ends ? std::optional<Vector>(ends->first) : std::optional<Vector>(Vector::Zero(model.dimension)), "--x0");
  if (f.steps < 2) throw ContractError("--steps must be at least 2");
  if (f.samples < 1) throw ContractError("--samples must be at least 1");
  const SimulationSpec spec{model, x0, f.steps, f.seed, f.samples};
  const auto names = write_samples(spec, f.out_dir);
  for (const auto& n : names) std::cout << (fs::path(f.out_dir) / n).string() << "\n";
  return kOk;
}

// --- mpp -------------------------------------------------------------------

struct MppFlags {
  ModelFlags model;
  std::string x0;
  std::string x1;
  std::size_t steps = 200;
  std::size_t starts = 1;
  std::uint64_t seed = 0;
  std::string method = "newton";
  std::size_t max_iters = 5000;
  double tolerance = 1e-8;
  double max_step = 0.5;
  std::string out_dir = ".";
};

OptimizerConfig optimizer_config(const MppFlags& f) {
  OptimizerConfig cfg;
  cfg.steps = f.steps;
  cfg.max_iters = f.max_iters;
  cfg.gradient_tolerance = f.tolerance;
  cfg.method = parse_descent_method(f.method);
  cfg.line_search.max_step = f.max_step;
  cfg.validate();
  return cfg;
}

json run_json(const std::string& model, const json& params, const Vector& x0, const Vector& x1,
              const OptimizerConfig& cfg, const OptimizeResult& r) {
  json j = diagnostics_json(r);
  j["model"] = model;
  j["params"] = params;
  j["x_start"] = to_json_vector(x0);
  j["x_end"] = to_json_vector(x1);
  j["steps"] = cfg.steps;
  j["method"] = std::string(to_string(cfg.method));
  j["scheme"] = "midpoint";
  j["gradient_tolerance"] = cfg.gradient_tolerance;
  return j;
}

int cmd_mpp(const MppFlags& f) {
  const OptimizerConfig cfg = optimizer_config(f);
  const fs::path out = f.out_dir;
  const auto scales = scale_list(f.model);
  bool all_converged = true;

  if (scales.size() > 1) {
    if (f.model.name != "example2") throw ContractError("scale sweeps (--a/--b lists) are for example2");
    if (f.starts != 1) throw ContractError("--starts applies to single runs, not scale sweeps");
    const auto base = builtin_model("example2", {{"a", 1.0}, {"b", 1.0}});
    const auto ends = default_endpoints("example2");
    const Vector x0 = endpoint(f.x0, base, ends->first, "--x0");
    const Vector x1 = endpoint(f.x1, base, ends->second, "--x1");
    if ((x0 - ends->first).norm() != 0.0 || (x1 - ends->second).norm() != 0.0) {
      throw ContractError("scale sweeps use the metastable endpoints (-2,-2) -> (2,2)");
    }
    for (const auto& scale : scales) make_model(f.model, scale);  // condition warnings
    const auto runs = run_example2_sweep(scales, cfg);
    for (const auto& run : runs) {
      const std::string stem = "mpp_" + scale_tag(run.a, run.b);
      write_file_atomic(out / (stem + ".csv"), path_to_csv(run.result.path));
      json j = run_json("example2", params_json(f.model, std::pair{run.a, run.b}), x0, x1, cfg, run.result);
      j["P"] = run.a * run.a / (run.b * run.b);
      j["start"] = run.start;
      j["path_file"] = stem + ".csv";
      write_json(out / (stem + ".json"), j);
      all_converged = all_converged && run.result.converged;
      std::cout << stem << ": om=" << run.result.om.total << " converged=" << run.result.converged
                << " gradient=" << run.result.gradient_norm << "\n";
    }
    return all_converged ? kOk : kNoConvergence;
  }

  const SdeModel model = make_single_model(f.model);
  const auto ends = default_endpoints(model.name);
  const Vector x0 = endpoint(f.x0, model, ends ? std::optional<Vector>(ends->first) : std::nullopt, "--x0");
  const Vector x1 = endpoint(f.x1, model, ends ? std::optional<Vector>(ends->second) : std::nullopt, "--x1");

  const auto results = minimize_om_multistart(model, x0, x1, cfg, f.starts, f.seed);
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    const auto& cand = results[i];
    const auto& cur = results[best];
    if ((cand.converged && !cur.converged) || (cand.converged == cur.converged && cand.om.total < cur.om.total)) best = i;
  }
  const OptimizeResult& r = results[best];
  write_file_atomic(out / "mpp.csv", path_to_csv(r.path));

  json j = run_json(model.name, params_json(f.model, scales.empty() ? std::nullopt : std::optional(scales.front())),
                    x0, x1, cfg, r);
  j["path_file"] = "mpp.csv";
  if (model.name == "example2") j["P"] = j["params"]["a"].get<double>() * j["params"]["a"].get<double>() /
                                          (j["params"]["b"].get<double>() * j["params"]["b"].get<double>());
  j["best_start"] = best;
  j["starts"] = json::array();
  for (const auto& res : results) {
    j["starts"].push_back({{"om", res.om.total}, {"converged", res.converged}, {"gradient_norm", res.gradient_norm}});
  }

  if (model.name == "example1" && model.dimension == 1) {
    try {
      const DiscretePath shoot = solve_el_bvp(euler_lagrange_rhs_example1, x0[0], x1[0], cfg.steps);
      write_file_atomic(out / "shooting.csv", path_to_csv(shoot));
      j["shooting"] = {{"path_file", "shooting.csv"},
                       {"om", to_json(om_functional(model, shoot))},
                       {"el_residual", euler_lagrange_residual(model, shoot)},
                       {"max_difference", (shoot.values() - r.path.values()).cwiseAbs().maxCoeff()}};
    } catch (const NoConvergenceError& e) {
      j["shooting"] = {{"error", e.what()}};
    }
  }
  write_json(out / "mpp.json", j);
  std::cout << "om=" << r.om.total << " converged=" << r.converged << " gradient=" << r.gradient_norm
            << " el_residual=" << r.el_residual << "\n";
  return r.converged ? kOk : kNoConvergence;
}

// --- tube ------------------------------------------------------------------

struct TubeFlags {
  ModelFlags model;
  std::string reference;
  std::string compare;
  std::string epsilon = "0.5";
  double alpha = 0.2;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::size_t tube_steps = 0;
  std::string out_dir = ".";
  std::string experiment;
  // Set when the flag was given explicitly (the experiment has its own defaults).
  bool epsilon_given = false;
  bool samples_given = false;
};

int cmd_experiment(const TubeFlags& f);

int cmd_tube(const TubeFlags& f) {
  if (!f.experiment.empty()) {
    if (f.experiment != "linear-ratio") throw ContractError("unknown experiment '" + f.experiment + "' (linear-ratio)");
    if (!f.model.name.empty() || !f.reference.empty() || !f.compare.empty()) {
      throw ContractError("--experiment defines its own model and paths");
    }
    return cmd_experiment(f);
  }
  if (f.reference.empty()) throw ContractError("--reference is required");
  const SdeModel model = make_single_model(f.model);
  const HolderParams holder{f.alpha};
  holder.validate();
  if (!holder.in_small_ball_range()) std::cerr << "warning: alpha outside (0, 1/4)\n";
  const auto eps = parse_list(f.epsilon, "--epsilon");
  const DiscretePath reference = read_path_csv(f.reference);
  const fs::path out = f.out_dir;

  json j;
  j["model"] = model.name;
  j["params"] = params_json(f.model, scale_list(f.model).empty() ? std::nullopt : std::optional(scale_list(f.model).front()));
  j["reference_file"] = f.reference;
  j["alpha"] = f.alpha;
  j["samples"] = f.samples;
  j["seed"] = f.seed;

  if (f.compare.empty()) {
    DiscretePath tube_ref = reference;
    if (f.tube_steps != 0) {
      if (reference.steps() % f.tube_steps != 0) throw ContractError("--tube-steps must divide the reference steps");
      tube_ref = reference.subsample(reference.steps() / f.tube_steps);
    }
    const TubeQuery q{model, tube_ref, eps.front(), holder, f.samples, f.seed};
    const auto ladder = tube_probability_ladder(q, eps);
    j["tube_steps"] = tube_ref.steps();
    j["estimates"] = json::array();
    for (const auto& e : ladder) {
      j["estimates"].push_back(to_json(e));
      if (e.low_statistics) std::cerr << "warning: no sample inside the tube at epsilon " << e.epsilon << "\n";
    }
    j["ladder_file"] = "tube_ladder.csv";
    write_file_atomic(out / "tube_ladder.csv", tube_ladder_csv(ladder));
    write_json(out / "tube.json", j);
    for (const auto& e : ladder) std::cout << "epsilon=" << e.epsilon << " hits=" << e.hits << " p=" << e.probability << "\n";
    return kOk;
  }

  const DiscretePath second = read_path_csv(f.compare);
  RatioOptions options;
  options.epsilon = eps.front();
  options.holder = holder;
  options.samples = f.samples;
  options.seed = f.seed;
  options.tube_steps = f.tube_steps;
  const auto ladder = om_ratio_ladder(model, reference, second, eps, options);
  j["compare_file"] = f.compare;
  j["tube_steps"] = f.tube_steps == 0 ? reference.steps() : f.tube_steps;
  j.update(to_json(ladder.front()));
  j["epsilon"] = ladder.front().first.epsilon;
  j["ladder"] = json::array();
  for (const auto& c : ladder) {
    json cj = to_json(c);
    cj["epsilon"] = c.first.epsilon;
    j["ladder"].push_back(cj);
  }
  j["ladder_file"] = "ratio_ladder.csv";
  write_file_atomic(out / "ratio_ladder.csv", ratio_ladder_csv(ladder));
  write_json(out / "ratio.json", j);
  for (const auto& c : ladder) {
    std::cout << "epsilon=" << c.first.epsilon << " hits=" << c.first.hits << "/" << c.second.hits;
    if (c.inconclusive) {
      std::cout << " inconclusive\n";
    } else {
      std::cout << " log_ratio=" << c.log_prob_ratio << " prediction=" << c.om_prediction
                << " stderr=" << c.standard_error << "\n";
    }
  }
  return kOk;
}

json ratio_experiment_json(const RatioExperiment& ex, const RatioExperimentConfig& cfg) {
  json j = to_json(ex.check);
  j["experiment"] = "linear-ratio";
  j["epsilon"] = cfg.epsilon;
  j["alpha"] = cfg.holder.alpha;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  j["reference_steps"] = cfg.reference_steps;
  j["tube_steps"] = ex.tube_steps;
  j["first_file"] = "ratio_minimizer.csv";
  j["second_file"] = "ratio_straight.csv";
  return j;
}

int cmd_experiment(const TubeFlags& f) {
  RatioExperimentConfig cfg;
  if (f.epsilon_given) {
    const auto eps = parse_list(f.epsilon, "--epsilon");
    if (eps.size() != 1) throw ContractError("the ratio experiment takes a single --epsilon");
    cfg.epsilon = eps.front();
  }
  cfg.holder.alpha = f.alpha;
  cfg.holder.validate();
  if (f.samples_given) cfg.samples = f.samples;
  cfg.seed = f.seed;
  if (f.tube_steps != 0) cfg.tube_steps = f.tube_steps;
  const RatioExperiment ex = run_linear_ratio_experiment(cfg);
  const fs::path out = f.out_dir;
  write_file_atomic(out / "ratio_minimizer.csv", path_to_csv(ex.minimizer));
  write_file_atomic(out / "ratio_straight.csv", path_to_csv(ex.straight));
  write_json(out / "ratio.json", ratio_experiment_json(ex, cfg));
  const auto& c = ex.check;
  std::cout << "tube_steps=" << ex.tube_steps << " hits=" << c.first.hits << "/" << c.second.hits;
  if (c.inconclusive) {
    std::cout << " inconclusive\n";
  } else {
    std::cout << " log_ratio=" << c.log_prob_ratio << " prediction=" << c.om_prediction
              << " stderr=" << c.standard_error << "\n";
  }
  return kOk;
}

// --- om-eval ---------------------------------------------------------------

struct OmEvalFlags {
  ModelFlags model;
  std::string path_file;
  std::string scheme = "midpoint";
  std::string out;
};

int cmd_om_eval(const OmEvalFlags& f) {
  const SdeModel model = make_single_model(f.model);
  OmScheme scheme = OmScheme::kMidpoint;
  if (f.scheme == "trapezoid") {
    scheme = OmScheme::kNodalTrapezoid;
  } else if (f.scheme != "midpoint") {
    throw ContractError("--scheme must be midpoint or trapezoid");
  }
  const DiscretePath path = read_path_csv(f.path_file);
  if (path.dimension() != model.dimension) {
    throw ContractError(f.path_file + ": path has " + std::to_string(path.dimension()) + " columns, model needs " +
                        std::to_string(model.dimension));
  }
  json j = to_json(om_functional(model, path, scheme));
  j["model"] = model.name;
  j["scheme"] = f.scheme;
  j["path_file"] = f.path_file;
  if (f.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(f.out, j);
  }
  return kOk;
}

// --- reproduce -------------------------------------------------------------

struct ReproduceFlags {
  std::string out_dir;
  std::size_t samples = 10;
  std::uint64_t seed = 0;
  std::size_t example1_steps = 400;
  std::size_t example2_steps = 1000;
  std::size_t simulation_steps = 1000;
  std::string scales = "1,5,10,30";
  double b = 1.0;
  std::size_t max_iters = 400;
  double tolerance = 1e-8;
};

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

int cmd_reproduce(const ReproduceFlags& f) {
  const fs::path out = f.out_dir;
  std::vector<std::string> files;
  auto emit = [&](const std::string& rel, const std::string& contents) {
    write_file_atomic(out / rel, contents);
    files.push_back(rel);
  };
  auto prefixed = [](const std::string& dir, const std::vector<std::string>& names) {
    std::vector<std::string> r;
    for (const auto& n : names) r.push_back(dir + "/" + n);
    return r;
  };
  bool all_converged = true;
  json summary;

  // Example 1: sample paths, direct minimizer and Euler-Lagrange shooting.
  {
    OptimizerConfig cfg;
    cfg.steps = f.example1_steps;
    cfg.gradient_tolerance = f.tolerance;
    const Example1Run run = run_example1(cfg);
    const SdeModel model = builtin_model("example1");
    const SimulationSpec spec{model, default_endpoints("example1")->first, f.simulation_steps, f.seed, f.samples};
    const auto samples = prefixed("example1/samples", write_samples(spec, out / "example1" / "samples"));
    files.insert(files.end(), samples.begin(), samples.end());
    emit("example1/mpp.csv", path_to_csv(run.minimizer.path));
    emit("example1/shooting.csv", path_to_csv(run.shooting));
    json j = diagnostics_json(run.minimizer);
    j["model"] = "example1";
    j["steps"] = f.example1_steps;
    j["path_file"] = "mpp.csv";
    j["shooting"] = {{"path_file", "shooting.csv"},
                     {"om", to_json(run.shooting_om)},
                     {"el_residual", run.shooting_el_residual},
                     {"max_difference", run.max_difference}};
    emit("example1/mpp.json", j.dump(2) + "\n");
    all_converged = all_converged && run.minimizer.converged;
    summary["example1"] = {{"om", run.minimizer.om.total},
                           {"converged", run.minimizer.converged},
                           {"gradient_norm", run.minimizer.gradient_norm},
                           {"shooting_om", run.shooting_om.total},
                           {"max_difference", run.max_difference},
                           {"samples", samples},
                           {"mpp", "example1/mpp.csv"},
                           {"shooting", "example1/shooting.csv"}};
    std::cout << "example1: om=" << run.minimizer.om.total << " converged=" << run.minimizer.converged
              << " shooting_om=" << run.shooting_om.total << " max_difference=" << run.max_difference << "\n";
  }

  // Example 2: the scale sweep with b fixed.
  std::vector<std::pair<double, double>> scales;
  for (double a : parse_list(f.scales, "--scales")) scales.emplace_back(a, f.b);
  OptimizerConfig cfg;
  cfg.steps = f.example2_steps;
  cfg.max_iters = f.max_iters;
  cfg.gradient_tolerance = f.tolerance;
  const auto runs = run_example2_sweep(scales, cfg);
  summary["example2"] = json::array();
  json figure_grid = json::array();
  std::vector<std::string> mpp_files;
  for (const auto& run : runs) {
    const std::string tag = scale_tag(run.a, run.b);
    const SdeModel model = builtin_model("example2", {{"a", run.a}, {"b", run.b}});
    const SimulationSpec spec{model, default_endpoints("example2")->first, f.simulation_steps, f.seed, f.samples};
    const auto samples = prefixed("example2/samples_" + tag, write_samples(spec, out / "example2" / ("samples_" + tag)));
    files.insert(files.end(), samples.begin(), samples.end());
    const std::string mpp = "example2/mpp_" + tag + ".csv";
    emit(mpp, path_to_csv(run.result.path));
    json j = diagnostics_json(run.result);
    j["model"] = "example2";
    j["params"] = {{"a", run.a}, {"b", run.b}};
    j["P"] = run.a * run.a / (run.b * run.b);
    j["steps"] = f.example2_steps;
    j["start"] = run.start;
    j["path_file"] = "mpp_" + tag + ".csv";
    emit("example2/mpp_" + tag + ".json", j.dump(2) + "\n");
    mpp_files.push_back(mpp);
    all_converged = all_converged && run.result.converged;
    summary["example2"].push_back({{"a", run.a},
                                   {"b", run.b},
                                   {"P", run.a * run.a / (run.b * run.b)},
                                   {"om", run.result.om.total},
                                   {"converged", run.result.converged},
                                   {"gradient_norm", run.result.gradient_norm},
                                   {"start", run.start},
                                   {"mpp", mpp},
                                   {"samples", samples}});
    figure_grid.push_back({{"a", run.a}, {"b", run.b}, {"samples", samples}, {"mpp", mpp}, {"curves", samples.size() + 1}});
    std::cout << "example2 " << tag << ": om=" << run.result.om.total << " converged=" << run.result.converged
              << " gradient=" << run.result.gradient_norm << " start=" << run.start << "\n";
  }
  summary["example2_om_strictly_monotone_in_P"] = strictly_monotone_om(runs);
  summary["all_converged"] = all_converged;
  emit("summary.json", summary.dump(2) + "\n");

  json manifest;
  manifest["generator"] = "ompath reproduce";
  manifest["files"] = json::array();
  for (const auto& rel : files) {
    const std::string data = read_file(out / rel);
    manifest["files"].push_back({{"path", rel}, {"sha256", sha256_hex(data)}, {"bytes", data.size()}});
  }
  manifest["figures"] = {
      {{"kind", "paths-overlay"},
       {"name", "example1"},
       {"samples", summary["example1"]["samples"]},
       {"mpp", "example1/mpp.csv"},
       {"curves", summary["example1"]["samples"].size() + 1}},
      {{"kind", "mpp-grid"}, {"name", "example2"}, {"panels", figure_grid}},
      {{"kind", "p-comparison"}, {"name", "example2"}, {"mpp", mpp_files}, {"curves", mpp_files.size()}}};
  write_json(out / "manifest.json", manifest);
  return all_converged ? kOk : kNoConvergence;
}

// --- config files ----------------------------------------------------------

// Moves `--config FILE` out of the arguments and splices the file's flat
// key = value pairs in right after the subcommand name, so that flags given on
// the command line come later and win.
std::vector<std::string> expand_config(std::vector<std::string> args, const std::set<std::string>& subcommands) {
  std::optional<std::string> file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file name");
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!file) return args;

  std::ifstream in(*file);
  if (!in) throw CLI::FileError::Missing(*file);
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (!item.parents.empty()) throw CLI::ConversionError(*file + ": sections are not supported; use flat key = value");
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    injected.push_back("--" + item.name + "=" + value);
  }
  auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) { return subcommands.count(a) > 0; });
  const auto pos = sub == args.end() ? args.end() : sub + 1;
  args.insert(pos, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Most probable transition paths of SDEs with time-varying additive noise.\n"
               "Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numerical failure, 4 non-convergence.\n"
               "OMPATH_THREADS caps the number of worker threads used for ensembles."};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_doc;
  app.add_option("--config", config_doc,
                 "flat key = value file (keys are flag names without dashes); command-line flags override it");

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "Euler-Maruyama sample paths, one CSV (t,x1..xn) per sample");
  add_model_flags(s, sim.model);
  s->add_option("--x0", sim.x0, "start state, comma separated (default: first metastable state or 0)");
  s->add_option("--steps", sim.steps, "grid steps N")->capture_default_str();
  s->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  s->add_option("--samples", sim.samples, "number of sample paths")->capture_default_str();
  s->add_option("--out-dir", sim.out_dir, "output directory; files sample_0000.csv, ...")->capture_default_str();

  MppFlags mpp;
  auto* m = app.add_subcommand("mpp", "Most probable path by minimizing the OM functional");
  add_model_flags(m, mpp.model);
  m->add_option("--x0", mpp.x0, "start state (default: model's metastable state)");
  m->add_option("--x1", mpp.x1, "end state (default: model's metastable state)");
  m->add_option("--steps", mpp.steps, "grid steps N")->capture_default_str();
  m->add_option("--starts", mpp.starts, "multi-start count; start 0 is the straight line")->capture_default_str();
  m->add_option("--seed", mpp.seed, "seed of the random starts")->capture_default_str();
  m->add_option("--method", mpp.method, "newton | cg | gd")->capture_default_str();
  m->add_option("--max-iters", mpp.max_iters, "iteration limit")->capture_default_str();
  m->add_option("--tol", mpp.tolerance, "gradient max-norm tolerance")->capture_default_str();
  m->add_option("--max-step", mpp.max_step, "largest node move per iteration")->capture_default_str();
  m->add_option("--out-dir", mpp.out_dir, "output directory")->capture_default_str();
  m->footer(
      "Outputs: mpp.csv (t,x1..xn) and mpp.json, or mpp_a<a>_b<b>.{csv,json} for an example2 sweep (--a 1,5,10,30).\n"
      "JSON keys: om{total,drift_term,divergence_term,grid_size}, iterations, converged, gradient_norm,\n"
      "el_residual, model, params, x_start, x_end, steps, method, scheme, gradient_tolerance, path_file,\n"
      "starts[] and best_start (single runs), P and start (example2), shooting{path_file,om,el_residual,\n"
      "max_difference} (example1, written with shooting.csv). Exit code 4 when not converged.");

  TubeFlags tube;
  auto* t = app.add_subcommand("tube", "Monte Carlo tube probabilities and the OM ratio law");
  add_model_flags(t, tube.model);
  t->add_option("--reference", tube.reference, "reference path CSV (simulation starts at its first node)");
  t->add_option("--compare", tube.compare, "second path CSV: run the ratio check against the reference");
  t->add_option("--epsilon", tube.epsilon, "tube radius or comma-separated ladder")->capture_default_str();
  t->add_option("--alpha", tube.alpha, "Holder exponent")->capture_default_str();
  t->add_option("--samples", tube.samples, "Monte Carlo samples")->capture_default_str();
  t->add_option("--seed", tube.seed, "master seed")->capture_default_str();
  t->add_option("--tube-steps", tube.tube_steps, "simulation grid; must divide the reference steps (0: same)")
      ->capture_default_str();
  t->add_option("--out-dir", tube.out_dir, "output directory")->capture_default_str();
  t->add_option("--experiment", tube.experiment,
                "linear-ratio: f = -x, g = 1, 0 -> 1, minimizer vs straight line (defaults epsilon 0.35,\n"
                "samples 200000; tube grid = largest with >= 200 hits in a pilot run with seed + 1)");
  t->footer(
      "Outputs without --compare: tube.json {estimates[{probability,hits,samples,standard_error,epsilon,alpha,\n"
      "low_statistics}], tube_steps, ...} and tube_ladder.csv (epsilon,hits,samples,probability,stderr).\n"
      "With --compare: ratio.json {log_prob_ratio, om_prediction, agreement, standard_error, inconclusive,\n"
      "om_first, om_second, joint_hits, first, second, ladder[]} and ratio_ladder.csv\n"
      "(epsilon,hits1,hits2,log_ratio,om_prediction,stderr). An inconclusive ratio is not an error.\n"
      "With --experiment linear-ratio: ratio.json (the ratio keys plus tube_steps, reference_steps, ...),\n"
      "ratio_minimizer.csv and ratio_straight.csv.");

  OmEvalFlags om;
  auto* o = app.add_subcommand("om-eval", "Evaluate the OM functional on a path CSV; prints JSON");
  add_model_flags(o, om.model);
  o->add_option("path", om.path_file, "path CSV with header t,x1..xn")->required();
  o->add_option("--scheme", om.scheme, "midpoint | trapezoid")->capture_default_str();
  o->add_option("--out", om.out, "write the JSON here instead of stdout");
  o->footer("JSON keys: total, drift_term, divergence_term, grid_size, model, scheme, path_file.");

  ReproduceFlags rep;
  auto* r = app.add_subcommand("reproduce", "Run both worked examples end to end into an output directory");
  r->add_option("--out-dir", rep.out_dir, "output directory")->required();
  r->add_option("--samples", rep.samples, "sample paths per figure")->capture_default_str();
  r->add_option("--seed", rep.seed, "master seed")->capture_default_str();
  r->add_option("--example1-steps", rep.example1_steps, "grid of the example1 paths")->capture_default_str();
  r->add_option("--example2-steps", rep.example2_steps, "grid of the example2 paths")->capture_default_str();
  r->add_option("--simulation-steps", rep.simulation_steps, "grid of the sample paths")->capture_default_str();
  r->add_option("--scales", rep.scales, "example2 values of a")->capture_default_str();
  r->add_option("--b", rep.b, "example2 value of b")->capture_default_str();
  r->add_option("--max-iters", rep.max_iters, "iteration limit per example2 solve")->capture_default_str();
  r->add_option("--tol", rep.tolerance, "gradient max-norm tolerance")->capture_default_str();
  r->footer(
      "Layout: example1/{mpp.csv,shooting.csv,mpp.json,samples/}, example2/{mpp_a<a>_b<b>.{csv,json},\n"
      "samples_a<a>_b<b>/}, summary.json, manifest.json (sha256 and size of every file, plus the curves each\n"
      "figure should show). Exit code 4 when any path did not converge; all files are still written.");

  int code = kOk;
  try {
    std::set<std::string> names;
    for (const auto* sub : app.get_subcommands({})) names.insert(sub->get_name());
    std::vector<std::string> args = expand_config(std::vector<std::string>(argv + 1, argv + argc), names);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*s) code = cmd_simulate(sim);
    if (*m) code = cmd_mpp(mpp);
    if (*t) {
      tube.epsilon_given = t->count("--epsilon") > 0;
      tube.samples_given = t->count("--samples") > 0;
      code = cmd_tube(tube);
    }
    if (*o) code = cmd_om_eval(om);
    if (*r) code = cmd_reproduce(rep);
  } catch (const ContractError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kNumerical;
  } catch (const NoConvergenceError& err) {
    std::cerr << "no convergence: " << err.what() << "\n";
    return kNoConvergence;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIoFailure;
  }
  return code;
}
