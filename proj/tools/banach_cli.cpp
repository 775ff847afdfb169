#include "banach/app/commands.hpp"
#include "banach/app/config.hpp"
#include "banach/app/report.hpp"
#include "banach/app/verification.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kOk = 0, kVerificationFailed = 1, kConfigError = 2, kNumericError = 3 };

struct Options
{
  std::string config;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol_scale;
};

void add_common(CLI::App* sub, Options& o)
{
  sub->add_option("config", o.config, "JSON run configuration")->required();
  sub->add_option("--threads", o.threads, "worker cap (results do not depend on it)");
  sub->add_option("--seed", o.seed, "master seed, overrides monte_carlo.seed");
  sub->add_option("--out", o.out, "output directory, overrides 'output'");
  sub->add_option("--tol-scale", o.tol_scale, "multiply every verification tolerance");
}

int run(const std::string& command, const Options& o)
{
  using namespace banach::app;
  RunConfig config = load_config(o.config);
  apply_overrides(config, o.threads, o.seed, o.out, o.tol_scale);

  Report report;
  if (command == "expected-zeros") report = cmd_expected_zeros(config);
  else if (command == "mc-zeros") report = cmd_mc_zeros(config);
  else if (command == "ring-report") report = cmd_ring_report(config);
  else if (command == "density-eval") report = cmd_density_eval(config);
  else {
    report = cmd_verify(config, [](const CriterionResult& r) {
      std::cout << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " measured "
                << format_number(r.measured) << " tolerance " << format_number(r.tolerance) << std::endl;
    });
  }
  const auto [csv, txt] = write_report(report, config.output);
  for (const auto& [k, v] : report.values) std::cout << k << ": " << v << "\n";
  std::cout << "wrote " << csv << " and " << txt << "\n";
  return report.passed ? kOk : kVerificationFailed;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Expected zero counts, Banach sets and their ring"};
  app.require_subcommand(1);
  Options options;
  const char* commands[][2] = {
    {"expected-zeros", "expected number of common zeros by quadrature"},
    {"mc-zeros", "Monte Carlo zero counts"},
    {"ring-report", "pairing matrices, ranks, kernels, ideal checks"},
    {"density-eval", "k-densities of a ring element on given frames"},
    {"verify", "run the verification suite"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, options);
  } catch (const banach::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const banach::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const banach::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  }
}
