// metascreen <subcommand> --config <path> [--out <dir>] [--threads N]
//
// Exit status: 0 success, 1 numerical check failure, 2 config error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "metascreen/config.hpp"
#include "metascreen/parallel.hpp"
#include "metascreen/resonance.hpp"
#include "metascreen/scattering.hpp"
#include "metascreen/validation.hpp"

using namespace metascreen;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A numerical check did not hold; reported with exit status 1.
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

class Output {
public:
    Output(const std::string& dir, const RunConfig& cfg, std::string command)
        : dir_(dir), cfg_(cfg), command_(std::move(command)) {}

    // Opens dir/name and writes the two comment lines every output file starts with.
    std::ofstream open(const std::string& name) {
        std::filesystem::create_directories(dir_);
        const auto path = std::filesystem::path(dir_) / name;
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << "# metascreen " << command_ << '\n' << "# config_hash = " << cfg_.hash_hex() << '\n';
        written_.push_back(path.string());
        return f;
    }
    std::vector<std::string> comments() const {
        return {"metascreen " + command_, "config_hash = " + cfg_.hash_hex()};
    }
    std::string path(const std::string& name) {
        std::filesystem::create_directories(dir_);
        const auto p = (std::filesystem::path(dir_) / name).string();
        written_.push_back(p);
        return p;
    }
    void report() const {
        for (const auto& p : written_) std::cout << "wrote " << p << '\n';
    }

private:
    std::string dir_;
    const RunConfig& cfg_;
    std::string command_;
    std::vector<std::string> written_;
};

NodeSet nodes_of(const RunConfig& cfg) { return quadrature_nodes(make_curve(cfg.shape), cfg.n); }

int cmd_greens(const RunConfig& cfg, Output& out) {
    const double alpha = cfg.alpha_at(cfg.omega);
    const GreenFunction g(cfg.background, cfg.omega, alpha, cfg.policy);
    const std::vector<Vec2> pts = cfg.target_grid();
    std::vector<Mat2c> vals(pts.size());
    parallel_for(static_cast<int>(pts.size()), [&](int k) {
        try {
            vals[k] = g.value(pts[k], cfg.source);
        } catch (const SingularEvaluationError&) {
            vals[k].setConstant(cplx(kNaN, kNaN));
        }
    });
    std::ofstream f = out.open("greens.csv");
    f << "# omega = " << num(cfg.omega) << ", alpha = " << num(alpha) << ", source = (" << num(cfg.source.x())
      << ", " << num(cfg.source.y()) << ")\n";
    f << "x1,x2,re_g11,im_g11,re_g12,im_g12,re_g21,im_g21,re_g22,im_g22\n";
    for (size_t k = 0; k < pts.size(); ++k) {
        f << num(pts[k].x()) << ',' << num(pts[k].y());
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) f << ',' << num(vals[k](i, j).real()) << ',' << num(vals[k](i, j).imag());
        f << '\n';
    }
    return 0;
}

int cmd_solve(const RunConfig& cfg, Output& out) {
    const NodeSet ns = nodes_of(cfg);
    const double alpha = cfg.alpha_at(cfg.omega);
    IncidentSpec spec;
    spec.theta = cfg.theta;
    spec.omega = cfg.omega;
    spec.background = cfg.background;
    SystemOptions opt;
    opt.policy = cfg.policy;
    const BlockSystem sys = assemble_system(ns, cfg.inclusion, cfg.background, cfg.omega, alpha, opt);
    for (const auto& w : sys.warnings) std::cerr << "warning: " << w << '\n';
    DensityPair d;
    try {
        d = solve_scattering(sys, incident_data(ns, spec));
    } catch (const SingularSystemError& e) {
        throw CheckFailure(std::string("solve: ") + e.what());
    }
    const std::vector<Vec2> pts = cfg.target_grid();
    const auto u = total_field(pts, d, ns, spec, cfg.inclusion, alpha, cfg.near, cfg.policy);

    std::ofstream fd = out.open("densities.csv");
    fd << "# omega = " << num(cfg.omega) << ", alpha = " << num(alpha) << ", residual = " << num(d.residual)
       << ", backward_error = " << num(d.backward_error) << ", sigma_min = " << num(sys.sigma_min()) << '\n';
    fd << "node,t,x1,x2,re_phi1,im_phi1,re_phi2,im_phi2,re_psi1,im_psi1,re_psi2,im_psi2\n";
    for (int j = 0; j < ns.n; ++j) {
        const Vec2c p = density_at(d.phi, j), q = density_at(d.psi, j);
        fd << j << ',' << num(ns.t[j]) << ',' << num(ns.x[j].x()) << ',' << num(ns.x[j].y()) << ','
           << num(p(0).real()) << ',' << num(p(0).imag()) << ',' << num(p(1).real()) << ',' << num(p(1).imag()) << ','
           << num(q(0).real()) << ',' << num(q(0).imag()) << ',' << num(q(1).real()) << ',' << num(q(1).imag())
           << '\n';
    }
    std::ofstream ff(out.path("field.csv"));
    write_field_csv(ff, pts, u, out.comments());
    std::cout << "backward error " << d.backward_error << ", residual " << d.residual << '\n';
    return 0;
}

void write_scan(std::ofstream& f, const ScanReport& s) {
    f << "omega,sigma_min\n";
    for (size_t k = 0; k < s.omega.size(); ++k) f << num(s.omega[k]) << ',' << num(s.sigma_min[k]) << '\n';
}

void write_matrix(std::ostream& f, const std::string& label, const Mat3c& M) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            f << label << '_' << i + 1 << j + 1 << ',' << num(M(i, j).real()) << ',' << num(M(i, j).imag()) << '\n';
}

int cmd_resonance(const RunConfig& cfg, Output& out) {
    const NodeSet ns = nodes_of(cfg);
    const std::vector<double> grid = cfg.omega_grid();
    const RigidBasis rb = rigid_basis(ns);
    const AreaRule area = interior_quadrature(*ns.curve, cfg.n_r, cfg.n_t);
    std::vector<std::string> notes;
    std::ostringstream rows;
    int count = 0;
    try {
        if (cfg.alpha_rule == AlphaRuleKind::Fixed) {
            // M does not depend on omega: the predictions are explicit
            const WBasis w = psi_basis(ns, rb, cfg.inclusion, cfg.alpha, cfg.policy);
            const Mat3c M = m_matrix(ns, area, w, rb, cfg.alpha, LeadingForm::Consistent, nullptr, cfg.policy);
            const FrequencyPrediction fp = resonant_frequencies(M, cfg.background.mu, cfg.inclusion.rho, cfg.sign);
            write_matrix(rows, "M", M);
            for (int i = 0; i < 3; ++i)
                rows << "m_" << i + 1 << ',' << num(fp.m(i).real()) << ',' << num(fp.m(i).imag()) << '\n';
            for (double o : fp.omega) rows << "omega_" << ++count << ',' << num(o) << ",0\n";
            notes = fp.diagnostics;
        } else {
            ResonanceInputs in;
            in.inclusion = cfg.inclusion;
            in.background = cfg.background;
            in.alpha_rule = cfg.alpha_fn();
            in.n_r = cfg.n_r;
            in.n_t = cfg.n_t;
            in.policy = cfg.policy;
            in.sign = cfg.sign;
            for (const PredictedResonance& p : predict_resonances(ns, in, grid, &notes)) {
                ++count;
                const std::string k = std::to_string(count);
                rows << "omega_" << k << ',' << num(p.omega) << ",0\n";
                rows << "alpha_" << k << ',' << num(p.alpha) << ",0\n";
                rows << "branch_" << k << ',' << p.branch << ",0\n";
                rows << "m_" << k << ',' << num(p.m.real()) << ',' << num(p.m.imag()) << '\n';
                const WBasis w = psi_basis(ns, rb, cfg.inclusion, p.alpha, cfg.policy);
                write_matrix(rows, "M" + k, m_matrix(ns, area, w, rb, p.alpha, LeadingForm::Consistent, nullptr,
                                                     cfg.policy));
            }
        }
    } catch (const IllConditionedError& e) {
        throw CheckFailure(std::string("resonance prediction: ") + e.what());
    }
    const ScanReport scan =
        sigma_min_scan(grid, ns, cfg.inclusion, cfg.background, cfg.alpha_fn(), cfg.dip_threshold, cfg.policy);
    int d = 0;
    for (const Dip& dip : scan.minima) {
        ++d;
        rows << "minimum_" << d << ',' << num(dip.omega) << ',' << num(dip.sigma) << '\n';
    }
    d = 0;
    for (const Dip& dip : scan.dips) {
        ++d;
        rows << "dip_" << d << ',' << num(dip.omega) << ',' << num(dip.sigma) << '\n';
    }
    rows << "median_sigma_min," << num(scan.median) << ",0\n";

    std::ofstream fs = out.open("scan.csv");
    write_scan(fs, scan);
    std::ofstream sm = out.open("summary.txt");
    for (const auto& n : notes) sm << "# note: " << n << '\n';
    for (const auto& n : scan.notes) sm << "# note: " << n << '\n';
    sm << "# omega_k: predicted resonances; M_ij (or Mk_ij) at the predicted alpha; minimum_k / dip_k: "
          "(omega, sigma_min) of scan minima and of minima below resonance.threshold x median\n";
    sm << "quantity,re,im\n" << rows.str();
    std::cout << count << " predicted resonance(s), " << scan.dips.size() << " dip(s) in the scan\n";
    return 0;
}

int cmd_absence(const RunConfig& cfg, Output& out) {
    const NodeSet ns = nodes_of(cfg);
    const std::vector<double> grid = cfg.omega_grid();
    const AbsenceReport a = absence_check(grid, ns, cfg.inclusion, cfg.background, cfg.alpha_fn(), cfg.alpha_static,
                                          cfg.policy);
    std::ofstream fs = out.open("scan.csv");
    write_scan(fs, a.scan);
    std::ofstream fa = out.open("absence.csv");
    fa << "omega,alpha,sigma_min,norm,sigma_min_leading\n";
    for (size_t k = 0; k < grid.size(); ++k)
        fa << num(a.scan.omega[k]) << ',' << num(a.scan.alpha[k]) << ',' << num(a.scan.sigma_min[k]) << ','
           << num(a.scan.norm[k]) << ',' << num(a.sigma_a0[k]) << '\n';
    std::ofstream ft = out.open("absence.txt");
    for (const auto& n : a.notes) ft << "# note: " << n << '\n';
    ft << "quantity,value\n";
    ft << "alpha_static," << num(a.alpha) << '\n';
    ft << "sigma_min_half_plus_kstar," << num(a.sigma_half_kstar) << '\n';
    ft << "min_sigma_min_over_norm," << num(a.min_ratio) << '\n';
    ft << "median_sigma_min," << num(a.scan.median) << '\n';
    ft << "dips_below_half_median," << a.scan.dips.size() << '\n';
    ft << "passed," << (a.passed ? 1 : 0) << '\n';
    if (!a.passed) {
        std::string why = "absence check failed:";
        for (const auto& n : a.notes) why += " " + n + ";";
        throw CheckFailure(why);
    }
    std::cout << "absence check passed\n";
    return 0;
}

int cmd_validate(const RunConfig& cfg, Output& out) {
    ValidationOptions opt;
    opt.seed = cfg.seed;
    opt.n_scan = cfg.n;
    opt.progress = [](int id, const std::string& name) {
        std::cerr << "running criterion " << id << " (" << name << ")\n";
    };
    opt.on_result = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
    const std::vector<CriterionResult> results = run_validation(cfg.criteria, opt);
    std::ofstream f = out.open("validation.csv");
    f << "criterion,name,status,detail\n";
    int failed = 0;
    for (const auto& r : results) {
        f << r.id << ',' << csv_quote(r.name) << ',' << (r.passed ? "PASS" : "FAIL") << ',' << csv_quote(r.detail)
          << '\n';
        failed += r.passed ? 0 : 1;
    }
    std::cout << results.size() - failed << " of " << results.size() << " criteria passed\n";
    if (failed) {
        std::string names;
        for (const auto& r : results)
            if (!r.passed) names += (names.empty() ? "" : ", ") + std::to_string(r.id) + " (" + r.name + ")";
        throw CheckFailure("failed criteria: " + names);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-integral solver for a periodic elastic metascreen above a Dirichlet half-plane"};
    app.require_subcommand(1, 1);
    std::string config, out_dir = ".";
    int threads = -1;
    const char* names[][2] = {{"greens-eval", "kernel values G+ on the target grid"},
                              {"solve", "scattering densities and the total field on the target grid"},
                              {"resonance", "M, predicted resonant frequencies and the sigma_min scan"},
                              {"absence", "stiff-background report: no subwavelength resonance"},
                              {"validate", "acceptance suite with a pass/fail table"}};
    for (auto& [name, help] : names) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "flat key = value config file")->required();
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--threads", threads, "worker threads (default: METASCREEN_THREADS, else all cores)")
            ->check(CLI::NonNegativeNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        cfg = load_config(config);
    } catch (const ConfigError& e) {
        std::cerr << "metascreen: " << e.what() << '\n';
        return 2;
    }
    // 0 selects METASCREEN_THREADS, then the hardware concurrency
    set_thread_count(threads < 0 ? 0 : threads);

    Output out(out_dir, cfg, command);
    try {
        int rc = 0;
        if (command == "greens-eval") rc = cmd_greens(cfg, out);
        if (command == "solve") rc = cmd_solve(cfg, out);
        if (command == "resonance") rc = cmd_resonance(cfg, out);
        if (command == "absence") rc = cmd_absence(cfg, out);
        if (command == "validate") rc = cmd_validate(cfg, out);
        out.report();
        return rc;
    } catch (const CheckFailure& e) {
        out.report();
        std::cerr << "metascreen: " << command << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "metascreen: " << command << ": " << e.what() << '\n';
        return 1;
    }
}
