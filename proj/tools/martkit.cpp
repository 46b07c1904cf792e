#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include <martkit/harness/report.hpp>
#include <martkit/harness/suites.hpp>
#include <martkit/operators/walsh.hpp>

using namespace martkit;
namespace fs = std::filesystem;

namespace {

struct VerifyArgs {
  std::string suite{"all"};
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> depths;
  std::optional<std::size_t> samples;
  std::string format{"json"};
  std::string out;
  std::optional<std::size_t> workers;
  bool timing{false};
};

int run_verify(const VerifyArgs& a) {
  CorpusConfig cfg = a.config.empty() ? CorpusConfig{} : config_from_json(read_json_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  if (!a.depths.empty()) cfg.depths = a.depths;
  if (a.samples) cfg.samples = *a.samples;
  if (a.workers)
    cfg.workers = *a.workers;
  else if (a.config.empty() || cfg.workers == 1)
    cfg.workers = workers_from_env();
  if (a.timing) cfg.timing = true;
  cfg.validate();
  const auto format = report_format_from_string(a.format);
  auto recs = run_suites(a.suite, cfg);
  if (a.out.empty())
    std::cout << emit_report(recs, format);
  else
    write_report(recs, format, a.out);
  std::size_t failed = 0;
  for (auto& r : recs) failed += !r.pass;
  std::fprintf(stderr, "%zu records, %zu failed\n", recs.size(), failed);
  return failed ? 1 : 0;
}

struct DecomposeArgs {
  std::string tree, f, g;
  bool json{false};
};

int run_decompose(const DecomposeArgs& a) {
  auto tree = tree_from_json(read_json_file(a.tree));
  auto f = step_function_from_json(tree, read_json_file(a.f));
  auto g = step_function_from_json(tree, read_json_file(a.g));
  auto fm = Martingale::from_terminal(f), gm = Martingale::from_terminal(g);
  auto pd = product_decompose(fm, gm);
  Json out;
  out["pi1"] = {{"H1", number_to_json(h1_norm(pd.pi1))}, {"h1", number_to_json(small_h1_norm(pd.pi1))},
                {"L1", number_to_json(lp_norm(pd.pi1.terminal(), 1.0))}};
  out["pi2"] = {{"H1", number_to_json(h1_norm(pd.pi2))}, {"h1", number_to_json(small_h1_norm(pd.pi2))},
                {"L1", number_to_json(lp_norm(pd.pi2.terminal(), 1.0))}};
  out["L"] = {{"variation", number_to_json(pd.l.variation_norm())},
              {"L1", number_to_json(lp_norm(pd.l.terminal(), 1.0))}};
  out["identity_error"] = number_to_json(product_identity_error(fm, gm, pd));
  out["f"] = {{"H1", number_to_json(h1_norm(fm))}};
  out["g"] = {{"BMO2", number_to_json(bmo_norm(gm))}};
  if (a.json) {
    std::cout << out.dump(1) << "\n";
    return 0;
  }
  std::printf("%-5s %14s %14s %14s\n", "", "H1", "h1", "L1");
  for (const char* k : {"pi1", "pi2"})
    std::printf("%-5s %14.8g %14.8g %14.8g\n", k, number_from_json(out[k]["H1"]), number_from_json(out[k]["h1"]),
                number_from_json(out[k]["L1"]));
  std::printf("L     variation %.8g  L1 %.8g\n", number_from_json(out["L"]["variation"]),
              number_from_json(out["L"]["L1"]));
  std::printf("f_H1 %.8g  g_BMO2 %.8g  identity error %.3g\n", number_from_json(out["f"]["H1"]),
              number_from_json(out["g"]["BMO2"]), number_from_json(out["identity_error"]));
  return 0;
}

struct CertifyArgs {
  std::string op;
  std::optional<double> q;
  std::vector<std::size_t> depths;
  std::size_t samples{50};
  std::uint64_t seed{1};
  double alpha{0.5};
  bool endpoint{true};
};

void print_estimate(const char* name, const ConstantEstimate& e, std::optional<double> claimed = std::nullopt) {
  std::printf("  %-16s %12.6g", name, e.value);
  if (claimed) std::printf("  (claimed %g)", *claimed);
  std::printf("  witness seed %llu depth %zu  by depth:", static_cast<unsigned long long>(e.witness_seed),
              e.witness_depth);
  for (auto& [d, v] : e.by_depth) std::printf(" %zu:%.4g", d, v);
  std::printf("\n");
}

int run_certify(const CertifyArgs& a) {
  CertifyConfig cfg;
  cfg.depths = a.depths.empty() ? default_depths(a.op) : a.depths;
  cfg.samples = a.samples;
  cfg.seed = a.seed;
  cfg.alpha = a.alpha;
  const double q = a.q ? *a.q : (a.op == "fractional" ? fractional_exponent(a.alpha) : 1.0);
  auto cert = kq_certify(a.op, q, cfg);
  const bool maximal = a.op == "maximal";
  std::printf("%s  q = %g  samples %zu per depth\n", a.op.c_str(), q, cfg.samples);
  print_estimate("h1 -> Lq", cert.h1_lq);
  print_estimate("L1 -> Lq,inf", cert.l1_weak);
  print_estimate("atom", cert.atom, maximal ? std::optional(2.0) : std::nullopt);
  print_estimate("jump", cert.jump, maximal ? std::optional(1.0) : std::nullopt);
  print_estimate("atom commutator", cert.atom_commutator);
  print_estimate("jump commutator", cert.jump_commutator);
  std::printf("  commutes with predictable multipliers: %s  defect %.3g\n", cert.commutes ? "yes" : "no",
              cert.commuting_defect);
  bool ok = cert.all_finite();
  if (maximal) ok = ok && cert.atom.value <= 2.0 + 1e-9 && cert.jump.value <= 1.0 + 1e-9;
  if (cert.commutes) ok = ok && cert.commuting_defect <= 1e-12;
  if (a.endpoint) {
    auto rep = endpoint_report(a.op, q, cfg);
    std::printf("endpoint\n");
    print_estimate("weak", rep.weak);
    print_estimate("strong", rep.strong);
    print_estimate("atom h1b", rep.atom_h1b);
    ok = ok && rep.weak.finite() && rep.strong.finite() && rep.atom_h1b.finite();
  }
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

struct KernelArgs {
  std::size_t n{1};
  std::size_t depth{8};
  std::string out_dir;
};

void write_kernel_csv(std::ostream& os, const WalshContext& ctx, std::size_t n) {
  auto ds = dirichlet_spectrum(ctx, n), ks = fejer_spectrum(ctx, n);
  auto dk = dirichlet_kernel(ctx, n), kk = fejer_kernel(ctx, n);
  char buf[128];
  os << "index,dirichlet_spectrum,fejer_spectrum,dirichlet_kernel,fejer_kernel\n";
  for (std::size_t j = 0; j < ctx.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", j, ds[j], ks[j], dk[j], kk[j]);
    os << buf;
  }
}

int run_kernel(const KernelArgs& a) {
  WalshContext ctx(a.depth);
  if (a.n > ctx.size()) throw std::invalid_argument("kernel: n exceeds 2^depth");
  if (a.out_dir.empty()) {
    write_kernel_csv(std::cout, ctx, a.n);
    return 0;
  }
  fs::create_directories(a.out_dir);
  std::ostringstream os;
  write_kernel_csv(os, ctx, a.n);
  const auto path = (fs::path(a.out_dir) / ("kernel_n" + std::to_string(a.n) + "_N" + std::to_string(a.depth) + ".csv"));
  write_text_file(path.string(), os.str());
  std::printf("%s\n", path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"martkit: martingale paraproducts, commutators and their constants"};
  app.require_subcommand(1);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run verification suites and emit a report");
  verify->add_option("suite", va.suite, "suite name or all");
  verify->add_option("--config", va.config, "corpus config (json)")->check(CLI::ExistingFile);
  verify->add_option("--seed", va.seed, "corpus seed");
  verify->add_option("--depth", va.depths, "tree depths (repeatable)");
  verify->add_option("--samples", va.samples, "samples per depth for every suite")->check(CLI::PositiveNumber);
  verify->add_option("--format", va.format, "json, csv or md")->check(CLI::IsMember({"json", "csv", "md", "markdown"}));
  verify->add_option("--out", va.out, "report path (stdout if omitted)");
  verify->add_option("--workers", va.workers, "worker threads (default MARTKIT_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--timing", va.timing, "record per-sample runtime");

  DecomposeArgs da;
  auto* decompose = app.add_subcommand("decompose", "print norms of the paraproducts and the diagonal term");
  decompose->add_option("--tree", da.tree, "tree (json)")->required()->check(CLI::ExistingFile);
  decompose->add_option("--f", da.f, "leaf values of f (json)")->required()->check(CLI::ExistingFile);
  decompose->add_option("--g", da.g, "leaf values of g (json)")->required()->check(CLI::ExistingFile);
  decompose->add_flag("--json", da.json, "emit json");

  CertifyArgs ca;
  auto* certify = app.add_subcommand("certify", "estimate the K_q constants of an operator");
  certify->add_option("--op", ca.op, "operator")->required()->check(CLI::IsMember(operator_names()));
  certify->add_option("--q", ca.q, "target exponent");
  certify->add_option("--depth", ca.depths, "tree depths (repeatable)");
  certify->add_option("--samples", ca.samples, "samples per depth")->check(CLI::PositiveNumber);
  certify->add_option("--seed", ca.seed, "seed");
  certify->add_option("--alpha", ca.alpha, "fractional order")->check(CLI::Range(0.0, 0.999));
  certify->add_flag("!--no-endpoint", ca.endpoint, "skip the endpoint suites");

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "dump Dirichlet and Fejer spectra and kernels as csv");
  kernel->add_option("--n", ka.n, "kernel index")->required()->check(CLI::PositiveNumber);
  kernel->add_option("--depth", ka.depth, "Walsh depth")->check(CLI::Range(1, 20));
  kernel->add_option("--out-dir", ka.out_dir, "directory for the csv (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*verify) return run_verify(va);
    if (*decompose) return run_decompose(da);
    if (*certify) return run_certify(ca);
    if (*kernel) return run_kernel(ka);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
