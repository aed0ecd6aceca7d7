#include "moser/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "moser/version.hpp"

namespace moser {

namespace {

// SAX walker that rejects duplicate object keys (nlohmann's DOM parser would
// silently keep the last one).
struct DuplicateKeyCheck : nlohmann::json::json_sax_t {
  std::vector<std::set<std::string>> scopes;
  std::string path;

  bool key(string_t& val) override {
    if (!scopes.empty() && !scopes.back().insert(val).second)
      throw std::invalid_argument("config: duplicate key \"" + val + "\"");
    return true;
  }
  bool start_object(std::size_t) override {
    scopes.emplace_back();
    return true;
  }
  bool end_object() override {
    scopes.pop_back();
    return true;
  }
  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t&) override { return true; }
  bool binary(binary_t&) override { return true; }
  bool start_array(std::size_t) override { return true; }
  bool end_array() override { return true; }
  bool parse_error(std::size_t pos, const std::string&,
                   const nlohmann::json::exception& ex) override {
    throw std::invalid_argument("config: parse error at byte " + std::to_string(pos) +
                                ": " + ex.what());
  }
};

double get_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number())
    throw std::invalid_argument("config." + key + ": expected a number");
  return j.get<double>();
}

std::vector<double> get_schedule(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("config." + key + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(get_number(e, key + "[]"));
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const nlohmann::json& v = it.value();
    if (k == "n") {
      if (!v.is_number_integer())
        throw std::invalid_argument("config.n: expected an integer");
      cfg.n = v.get<int>();
    } else if (k == "rmax") {
      cfg.rmax = get_number(v, k);
    } else if (k == "grid_inner") {
      cfg.grid_inner = static_cast<int>(get_number(v, k));
    } else if (k == "grid_outer") {
      cfg.grid_outer = static_cast<int>(get_number(v, k));
    } else if (k == "inner_scale") {
      cfg.inner_scale = get_number(v, k);
    } else if (k == "tol") {
      cfg.tol = get_number(v, k);
    } else if (k == "seed") {
      if (!v.is_number_unsigned() && !v.is_number_integer())
        throw std::invalid_argument("config.seed: expected an integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (k == "out_dir") {
      if (!v.is_string()) throw std::invalid_argument("config.out_dir: expected a string");
      cfg.out_dir = v.get<std::string>();
    } else if (k == "r_inner") {
      cfg.r_inner = get_number(v, k);
    } else if (k == "beta_factor") {
      cfg.beta_factor = get_number(v, k);
    } else if (k == "alpha_factor") {
      cfg.alpha_factor = get_number(v, k);
    } else if (k == "c_schedule") {
      cfg.c_schedule = get_schedule(v, k);
    } else if (k == "b_schedule") {
      cfg.b_schedule = get_schedule(v, k);
    } else if (k == "eps_schedule") {
      cfg.eps_schedule = get_schedule(v, k);
    } else if (k == "r_schedule") {
      cfg.r_schedule = get_schedule(v, k);
    } else if (k == "beta_fractions") {
      cfg.beta_fractions = get_schedule(v, k);
    } else if (k == "max_iters") {
      cfg.max_iters = static_cast<int>(get_number(v, k));
    } else {
      throw std::invalid_argument("config: unknown key \"" + k + "\"");
    }
  }
  if (cfg.n < 2) throw std::invalid_argument("config.n: n must be >= 2");
  if (cfg.rmax < 0.0) throw std::invalid_argument("config.rmax: must be positive");
  if (cfg.grid_inner < 8 || cfg.grid_outer < 8)
    throw std::invalid_argument("config.grid_*: node counts must be >= 8");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("config.tol: must be positive");
  if (!(cfg.r_inner > 0.0 && cfg.r_inner < 1.0))
    throw std::invalid_argument("config.r_inner: must lie in (0,1)");
  if (!(cfg.beta_factor > 0.0 && cfg.beta_factor <= 1.0))
    throw std::invalid_argument("config.beta_factor: must lie in (0,1]");
  if (!(cfg.alpha_factor > 0.0))
    throw std::invalid_argument("config.alpha_factor: must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("config.max_iters: must be >= 1");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  DuplicateKeyCheck sax;
  nlohmann::json::sax_parse(text, &sax);
  return from_json(nlohmann::json::parse(text));
}

nlohmann::json ExperimentConfig::to_json() const {
  return nlohmann::json{{"n", n},
                        {"rmax", rmax},
                        {"grid_inner", grid_inner},
                        {"grid_outer", grid_outer},
                        {"inner_scale", inner_scale},
                        {"tol", tol},
                        {"seed", seed},
                        {"out_dir", out_dir},
                        {"r_inner", r_inner},
                        {"beta_factor", beta_factor},
                        {"alpha_factor", alpha_factor},
                        {"c_schedule", c_schedule},
                        {"b_schedule", b_schedule},
                        {"eps_schedule", eps_schedule},
                        {"r_schedule", r_schedule},
                        {"beta_fractions", beta_fractions},
                        {"max_iters", max_iters}};
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string dump = cfg.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool ExperimentReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json jchecks = nlohmann::json::array();
  for (const auto& c : checks)
    jchecks.push_back({{"name", c.name},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"pass", c.pass},
                       {"note", c.note}});
  return nlohmann::json{{"command", command}, {"version", version},
                        {"config_hash", config_hash}, {"seed", seed},
                        {"n", n},           {"checks", jchecks},
                        {"flags", flags},   {"artifacts", artifacts},
                        {"pass", all_pass()}, {"extra", extra}};
}

void ExperimentReport::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report to " + path.string());
  out << to_json().dump(2) << "\n";
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_radial_csv(const RadialFunction& f, const std::filesystem::path& csv_path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    rows.push_back({format_double(f.grid->node(i)), format_double(f.values[i])});
  write_csv(csv_path, "r,value", rows);

  nlohmann::json side{{"n", f.grid->dim()},
                      {"R", f.grid->outer_radius()},
                      {"boundary_kind", to_string(f.kind)},
                      {"grading",
                       {{"kind", f.grid->spec().kind},
                        {"inner_scale", f.grid->spec().inner_scale},
                        {"inner_count", f.grid->spec().inner_count},
                        {"outer_count", f.grid->spec().outer_count}}}};
  std::filesystem::path jp = csv_path;
  jp.replace_extension(".json");
  std::ofstream out(jp);
  out << side.dump(2) << "\n";
}

void write_green(const GreenSolution& sol, const std::filesystem::path& csv_path) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < sol.profile.size(); ++i)
    rows.push_back({format_double(sol.profile.grid->node(i)),
                    format_double(sol.profile.values[i]),
                    format_double(sol.dvalues[i]), format_double(sol.deficit[i])});
  write_csv(csv_path, "r,value,dvalue,mass_deficit", rows);

  nlohmann::json side{{"n", sol.n},
                      {"A", sol.A},
                      {"r_inner", sol.r_inner},
                      {"R_max", sol.R_max},
                      {"tol", sol.tol},
                      {"flux_residual_max", sol.flux_residual_max}};
  std::filesystem::path jp = csv_path;
  jp.replace_extension(".json");
  std::ofstream out(jp);
  out << side.dump(2) << "\n";
}

void write_maximizer(const MaximizerResult& res, const std::filesystem::path& csv_path) {
  write_radial_csv(res.u, csv_path);
  nlohmann::json side{{"beta", res.beta},
                      {"R", res.R},
                      {"value", res.value},
                      {"c_k", res.c_k},
                      {"lambda_k", res.lambda_k},
                      {"el_residual", res.el_residual},
                      {"iterations", res.iterations},
                      {"converged", res.converged},
                      {"seed", res.seed},
                      {"seed_values", res.seed_values},
                      {"value_spread", res.value_spread}};
  std::filesystem::path jp = csv_path;
  jp.replace_extension(".meta.json");
  std::ofstream out(jp);
  out << side.dump(2) << "\n";

  std::filesystem::path lp = csv_path;
  lp.replace_extension(".log.jsonl");
  std::ofstream lout(lp);
  for (const auto& rec : res.log)
    lout << nlohmann::json{{"iter", rec.iter},
                           {"value", rec.value},
                           {"norm_residual", rec.norm_residual},
                           {"c_k", rec.c_k}}
                .dump()
         << "\n";
}

}  // namespace moser
