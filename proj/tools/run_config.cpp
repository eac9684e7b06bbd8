#include "run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gibbslab/parallel.hpp"

namespace gibbslab::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"L", "12", "grid half-width"},
      {"M", "1200", "grid nodes"},
      {"s", "2", "potential exponent, V = c|x|^s"},
      {"c", "1", "potential strength"},
      {"a", "1", "contact interaction mass"},
      {"smooth_amplitude", "0", "amplitude of an added Gaussian pair interaction"},
      {"smooth_width", "1", "width of the Gaussian pair interaction"},
      {"K", "2", "retained modes"},
      {"T", "2,4,8,16", "comma separated temperatures"},
      {"S", "200000", "Monte Carlo samples"},
      {"seed", "20240601", "sampling seed"},
      {"workers", "auto", "worker threads, or auto for all processors"},
      {"tail_mass", "1e-6", "largest certified Fock tail mass"},
      {"min_ess", "10", "smallest certified effective sample size"},
      {"identity_tol", "1e-8", "free-energy identity tolerance"},
      {"kernel_tol", "1e-8", "position kernel tolerance"},
      {"entropy_floor", "-1e-10", "lowest accepted relative entropy"},
      {"monotone_se", "1", "allowed rise of d_k in standard errors"},
      {"gap_se", "3", "allowed final partition gap in standard errors"},
      {"kernel_subgrid", "16", "nodes of the two-body kernel check"},
      {"kernel_window", "4", "half-width of the kernel check window"},
      {"trotter_t", "0.5", "heat kernel time"},
      {"trotter_m", "256", "Trotter steps"},
      {"trotter_L", "6", "Trotter grid half-width"},
      {"trotter_M", "64", "Trotter grid nodes per coordinate"},
      {"trotter_n", "2", "particles in the heat kernel"},
      {"format", "both", "json, csv or both"},
      {"verbosity", "1", "0 quiet, 1 summary, 2 detail"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

bool known(const std::string& key) {
  for (const auto& k : config_keys()) {
    if (k.name == key) return true;
  }
  return false;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("config: cannot parse " + key + " = '" + text + "'");
  }
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
  return out;
}

}  // namespace

nlohmann::json RunConfig::echo() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values) j[k] = v;
  return j;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    if (!known(key)) throw ConfigError("config: unknown key '" + key + "'");
    out[key] = trim(body.substr(eq + 1));
  }
  return out;
}

RunConfig resolve_config(const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& overrides) {
  RunConfig rc;
  for (const auto& k : config_keys()) rc.values[k.name] = k.fallback;
  for (const auto* layer : {&file, &overrides}) {
    for (const auto& [k, v] : *layer) {
      if (!known(k)) throw ConfigError("config: unknown key '" + k + "'");
      rc.values[k] = v;
    }
  }
  const auto& v = rc.values;
  const auto num = [&](const char* key) { return parse_number<double>(key, v.at(key)); };
  const auto count = [&](const char* key) { return parse_number<std::size_t>(key, v.at(key)); };

  SweepConfig& sw = rc.sweep;
  sw.half_width = num("L");
  sw.grid_points = count("M");
  sw.potential = PotentialSpec::power_law(num("s"), num("c"));
  sw.modes = count("K");
  sw.temperatures = parse_list("T", v.at("T"));
  sw.samples = count("S");
  sw.seed = parse_number<std::uint64_t>("seed", v.at("seed"));
  sw.workers = v.at("workers") == "auto" ? default_workers() : count("workers");
  if (sw.workers == 0) throw ConfigError("config: workers must be positive");
  sw.tolerance.tail_mass = num("tail_mass");
  sw.tolerance.min_ess = num("min_ess");
  sw.tolerance.identity = num("identity_tol");
  sw.tolerance.kernel = num("kernel_tol");
  sw.tolerance.entropy_floor = num("entropy_floor");
  sw.tolerance.monotone_se = num("monotone_se");
  sw.tolerance.gap_se = num("gap_se");
  sw.kernel_subgrid = count("kernel_subgrid");
  sw.kernel_window = num("kernel_window");
  rc.smooth_amplitude = num("smooth_amplitude");
  rc.smooth_width = num("smooth_width");

  const std::string& format = v.at("format");
  if (format == "json") {
    rc.format = Format::json;
  } else if (format == "csv") {
    rc.format = Format::csv;
  } else if (format == "both") {
    rc.format = Format::both;
  } else {
    throw ConfigError("config: format must be json, csv or both");
  }
  rc.verbosity = parse_number<int>("verbosity", v.at("verbosity"));

  try {
    const Grid1D grid(sw.half_width, sw.grid_points);
    sw.potential.on_grid(grid);
    sw.interaction = rc.smooth_amplitude > 0.0
                         ? InteractionSpec::gaussian(num("a"), rc.smooth_amplitude, rc.smooth_width, grid)
                         : InteractionSpec::delta(num("a"));
    sw.interaction.validate(grid);
    sw.validate();
    rc.trotter.time = num("trotter_t");
    rc.trotter.steps = parse_number<int>("trotter_m", v.at("trotter_m"));
    rc.trotter.grid = Grid1D(num("trotter_L"), count("trotter_M"));
    rc.trotter.particles = count("trotter_n");
    rc.trotter.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

std::filesystem::path output_directory(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GIBBSLAB_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::current_path();
}

}  // namespace gibbslab::cli
