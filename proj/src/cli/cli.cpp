#include "nol/cli.hpp"

#include <set>

#include "cli_internal.hpp"
#include "nol/error.hpp"
#include "nol/serialize.hpp"

namespace nol {
namespace cli {

using nlohmann::json;

void add_common_options(CLI::App* sub, CommonOptions& common, bool out_required) {
  sub->add_option("--config", common.config, "JSON file of option values; command-line flags win");
  sub->add_option("--seed", common.seed, "Random seed");
  sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* out = sub->add_option("--out", common.out, "Output path");
  if (out_required) out->required();
}

namespace {

std::string option_name(const std::string& token) {
  if (token.rfind("--", 0) != 0) return {};
  return token.substr(2, token.find('=') - 2);
}

/// Expands a --config JSON object into flags placed right after the
/// subcommand, skipping any option that is also given explicitly.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  std::set<std::string> explicit_options;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string name = option_name(args[i]);
    if (name.empty()) continue;
    explicit_options.insert(name);
    if (name == "config") {
      const std::size_t eq = args[i].find('=');
      if (eq != std::string::npos) config_path = args[i].substr(eq + 1);
      else if (i + 1 < args.size()) config_path = args[i + 1];
    }
  }
  if (config_path.empty() || args.size() < 2) return args;
  const json config = read_json_file(config_path);
  if (!config.is_object()) throw InputError(config_path + ": config must be a JSON object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : config.items()) {
    if (key == "config" || explicit_options.contains(key)) continue;
    const std::string flag = "--" + key;
    auto scalar = [&](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
    } else if (value.is_array()) {
      if (value.empty()) continue;
      injected.push_back(flag);
      for (const json& v : value) injected.push_back(scalar(v));
    } else if (value.is_null()) {
      continue;
    } else {
      injected.push_back(flag + "=" + scalar(value));
    }
  }
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace
}  // namespace cli

int run_cli(int argc, char** argv) {
  CLI::App app{"Re-projection and fusion of posed source images with source-pose refinement", "nol"};
  app.require_subcommand(1);
  cli::Runner run;
  cli::add_gen_scene(app, run);
  cli::add_render(app, run);
  cli::add_sample(app, run);
  cli::add_sweep(app, run);
  cli::add_eval(app, run);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = cli::expand_config(args);
  } catch (const InputError& e) {
    cli::log(std::string("error: ") + e.what());
    return 2;
  }
  std::vector<char*> cargs;
  for (std::string& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    run();
    return 0;
  } catch (const InputError& e) {
    cli::log(std::string("error: ") + e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    cli::log(std::string("error: ") + e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    cli::log(std::string("error: ") + e.what());
    return 2;
  } catch (const InvariantError& e) {
    cli::log(std::string("internal error: ") + e.what());
    return 3;
  } catch (const std::exception& e) {
    cli::log(std::string("internal error: ") + e.what());
    return 3;
  }
}

}  // namespace nol
