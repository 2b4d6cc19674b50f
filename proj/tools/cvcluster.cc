// Copyright 2026 The cvcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: cluster generation, schedule execution, Wigner
// grids, PNR heralding and the three algorithm pipelines.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"

#include "cvc/algorithms.h"
#include "cvc/cluster.h"
#include "cvc/fock.h"
#include "cvc/resources.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cvc;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitValidation = 4;

struct Output {
    std::string dir;
    bool force = false;

    fs::path path(const std::string &name) const { return fs::path(dir) / name; }

    std::ofstream open(const std::string &name) const {
        fs::path p = path(name);
        if (fs::exists(p) && !force) throw usage_error("refusing to overwrite '" + p.string() + "'; pass --force");
        if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
        std::ofstream out(p);
        if (!out) throw usage_error("cannot write '" + p.string() + "'");
        out << std::setprecision(12);
        return out;
    }
};

cplx parse_complex(const std::string &text) {
    static const std::regex re(R"(^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)?\s*(?:([-+])\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)?\s*[ij])?\s*$)");
    std::smatch m;
    if (text.empty() || !std::regex_match(text, m, re)) throw usage_error("cannot parse complex number '" + text + "'");
    double re_part = m[1].matched ? std::stod(m[1].str()) : 0.0;
    double im_part = 0.0;
    if (m[2].matched) {
        im_part = m[3].matched ? std::stod(m[3].str()) : 1.0;
        if (m[2].str() == "-") im_part = -im_part;
    }
    return {re_part, im_part};
}

void write_wigner(std::ostream &out, const WignerResult &w) {
    out << "x,p,W\n";
    for (int ip = 0; ip < w.ps.size(); ++ip) {
        for (int ix = 0; ix < w.xs.size(); ++ix) out << w.xs(ix) << "," << w.ps(ip) << "," << w.W(ip, ix) << "\n";
    }
}

void write_amplitudes(std::ostream &out, const FockState &s) {
    out << "index,re,im\n";
    for (long i = 0; i < s.size(); ++i) out << i << "," << s.amps()(i).real() << "," << s.amps()(i).imag() << "\n";
}

json gaussian_json(const GaussianState &g) {
    json cov = json::array();
    for (int i = 0; i < g.cov().rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < g.cov().cols(); ++j) row.push_back(g.cov()(i, j));
        cov.push_back(row);
    }
    std::vector<double> mean(g.mean().data(), g.mean().data() + g.mean().size());
    return json{{"type", "gaussian"}, {"modes", g.modes()}, {"mean", mean}, {"cov", cov}};
}

json live_json(const LiveState &s) {
    if (!s.fock) return gaussian_json(s.gaussian);
    json amps = json::array();
    for (long i = 0; i < s.amps.size(); ++i) amps.push_back({s.amps.amps()(i).real(), s.amps.amps()(i).imag()});
    return json{{"type", "fock"}, {"modes", s.fock_modes}, {"dims", s.amps.dims()}, {"amps", amps}};
}

// ---------------------------------------------------------------------------

struct ClusterArgs {
    int dim = 1;
    double r = 1.0;
    int M = 1;
    int steps = 1;
    bool uncoupled = false;
};

int cmd_cluster(const ClusterArgs &a, const Output &o) {
    if (a.dim != 1 && a.dim != 2) throw usage_error("--dim must be 1 or 2");
    ClusterConfig c{a.r, a.M, a.steps, a.dim};
    GaussianState g = a.dim == 1 ? generate_1d(c) : generate_2d(c, !a.uncoupled);
    Mat N = cluster_nullifiers(c);
    {
        auto out = o.open("cluster_cov.csv");
        out << "quadrature";
        for (const auto &m : g.modes()) out << "," << m << ":x," << m << ":p";
        out << "\n";
        for (int i = 0; i < g.cov().rows(); ++i) {
            out << g.modes()[i / 2] << (i % 2 ? ":p" : ":x");
            for (int j = 0; j < g.cov().cols(); ++j) out << "," << g.cov()(i, j);
            out << "\n";
        }
    }
    json nullifiers = json::array();
    std::set<std::pair<std::string, std::string>> edges;
    for (int k = 0; k < N.rows(); ++k) {
        std::vector<std::string> support;
        for (int i = 0; i < g.n(); ++i) {
            if (std::abs(N(k, 2 * i)) > 1e-9 || std::abs(N(k, 2 * i + 1)) > 1e-9) support.push_back(g.modes()[i]);
        }
        Vec v = N.row(k).transpose();
        double var = v.dot(g.cov() * v);
        nullifiers.push_back(json{{"support", support}, {"variance", var}});
        for (std::size_t i = 0; i < support.size(); ++i) {
            for (std::size_t j = i + 1; j < support.size(); ++j) edges.insert({support[i], support[j]});
        }
    }
    json graph{{"dimension", a.dim}, {"squeeze_r", a.r},      {"depth_M", a.M},
               {"steps", a.steps}, {"modes", g.modes()},     {"edges", json::array()},
               {"nullifiers", nullifiers}};
    for (const auto &[x, y] : edges) graph["edges"].push_back({x, y});
    o.open("cluster_graph.json") << graph.dump(2) << "\n";
    std::cout << "cluster: " << g.n() << " modes, covariance " << g.cov().rows() << "x" << g.cov().cols() << ", "
              << edges.size() << " edges\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_run(const std::string &path, std::uint64_t seed, const Output &o) {
    Schedule s = load_schedule(path);
    RunOptions opt;
    opt.seed = seed;
    register_operators(s, opt);
    ScheduleTrace tr = run_schedule(s, opt);
    {
        auto out = o.open("trace.jsonl");
        for (const auto &r : tr.records) out << r.to_json().dump() << "\n";
    }
    json final{{"schedule", s.name}, {"steps", tr.records.size()}, {"handoff_step", tr.handoff_step},
               {"handoff_leakage", tr.handoff_leakage}, {"outputs", json::object()}};
    for (const auto &[m, st] : tr.outputs) final["outputs"][m] = live_json(st);
    if (!tr.final_state.fock && tr.final_state.gaussian.n() > 0) final["live"] = live_json(tr.final_state);
    if (tr.final_state.fock && !tr.final_state.fock_modes.empty()) final["live"] = live_json(tr.final_state);
    o.open("final.json") << final.dump(2) << "\n";
    std::cout << "run: " << s.name << ", " << tr.records.size() << " steps\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct StateArgs {
    std::string kind = "coherent";
    std::string alpha = "0";
    double r = 0.0;
    int n = 0;
    double gamma = 0.0;
    int cutoff = 30;
};

FockState build_state(const StateArgs &a) {
    int d = a.cutoff;
    if (d < 2) throw usage_error("--cutoff must be at least 2");
    if (a.kind == "vacuum") return FockState::vacuum({d});
    if (a.kind == "coherent") return coherent_state(parse_complex(a.alpha), d);
    if (a.kind == "squeezed") return squeezed_state(a.r, 0.0, d);
    if (a.kind == "fock") {
        if (a.n < 0 || a.n >= d) throw validation_error("Fock number must be below the cutoff");
        return FockState::basis({d}, {a.n});
    }
    if (a.kind == "cubic") return build_resource({CubicApproxSpec{a.gamma, a.r}, d});
    if (a.kind == "on") return build_resource({OnSpec{3, on_default_a(a.gamma)}, d});
    if (a.kind == "gkp") return build_resource({GkpSpec{}, d});
    throw usage_error("unknown state kind '" + a.kind + "'");
}

int cmd_wigner(const StateArgs &a, double extent, int points, const Output &o) {
    if (points < 2 || extent <= 0) throw usage_error("grid needs --points >= 2 and --extent > 0");
    FockState s = build_state(a);
    WignerGrid grid{-extent, extent, -extent, extent, points};
    WignerResult w = wigner(s, grid);
    auto out = o.open("wigner.csv");
    write_wigner(out, w);
    std::cout << "wigner: min " << w.min() << ", integral " << w.integral() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct PnrArgs {
    std::string alpha = "0";
    double xi = 0.0;
    double r = 0.5;
    int k1 = 0;
    int k2 = 0;
    int cutoff = 30;
    int table = 6;
    bool wigner = false;
    double extent = 5.0;
    int points = 101;
};

int cmd_pnr(const PnrArgs &a, const Output &o) {
    if (a.k1 < 0 || a.k2 < 0) throw usage_error("photon counts must be non-negative");
    if (a.cutoff < 2) throw usage_error("--cutoff must be at least 2");
    FockState in = apply_op(squeezed_state(a.xi, 0.0, a.cutoff), displacement_op(parse_complex(a.alpha), a.cutoff), 0);
    in.normalize();
    PnrResult res = pnr_output(in, {a.k1, a.k2, a.r});
    {
        auto out = o.open("pnr_state.csv");
        write_amplitudes(out, res.state);
    }
    PnrTable t = pnr_probability_table(in, a.r, a.table);
    {
        auto out = o.open("pnr_probabilities.csv");
        out << "k1\\k2";
        for (int j = 0; j < t.P.cols(); ++j) out << "," << j;
        out << "\n";
        for (int i = 0; i < t.P.rows(); ++i) {
            out << i;
            for (int j = 0; j < t.P.cols(); ++j) out << "," << t.P(i, j);
            out << "\n";
        }
    }
    std::cout << "pnr: P(" << a.k1 << "," << a.k2 << ") = " << res.probability << ", table remainder " << t.remainder
              << "\n";
    if (a.wigner) {
        WignerResult w = wigner(res.state, {-a.extent, a.extent, -a.extent, a.extent, a.points});
        auto out = o.open("pnr_wigner.csv");
        write_wigner(out, w);
        std::cout << "pnr: Wigner min " << w.min() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_gbs(const std::string &path, int shots, std::uint64_t seed, std::optional<double> finite, const Output &o) {
    GbsInstance g = load_gbs(path);
    Schedule s = gbs_compile(g);
    if (finite) {
        s.model = SqueezingModel::Finite;
        s.squeeze_r = *finite;
    }
    GbsRun run = gbs_run(g, s, shots, seed);
    auto header = [&](std::ostream &out, const std::string &last) {
        for (int i = 0; i < g.n_modes; ++i) out << "n" << i << ",";
        out << last << "\n";
    };
    {
        auto out = o.open("gbs_empirical.csv");
        header(out, "count,frequency");
        for (const auto &[pat, c] : run.counts) {
            for (int k : pat) out << k << ",";
            out << c << "," << static_cast<double>(c) / shots << "\n";
        }
    }
    {
        auto out = o.open("gbs_hafnian.csv");
        header(out, "probability");
        std::vector<int> pat(g.n_modes, 0);
        std::function<void(int, int)> walk = [&](int i, int left) {
            if (i == g.n_modes) {
                double p = gbs_probability(g, pat);
                if (p > 0) {
                    for (int k : pat) out << k << ",";
                    out << p << "\n";
                }
                return;
            }
            for (int k = 0; k <= left; ++k) {
                pat[i] = k;
                walk(i + 1, left - k);
            }
            pat[i] = 0;
        };
        walk(0, 8);
    }
    std::cout << "gbs: " << shots << " shots, TV distance " << run.tv_distance << " (hafnian mass within 8 photons "
              << run.ideal_mass << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct GroverArgs {
    GroverInstance g;
    int iters = 4;
};

int cmd_grover(const GroverArgs &a, const Output &o) {
    GroverInstance g = a.g;
    if (g.n == 1) g.p = 0;
    check_grover(g);
    GroverTrace ex = grover_run(g, a.iters, true);
    GroverTrace ap = grover_run(g, a.iters, false);
    {
        auto out = o.open("grover_trace.csv");
        out << "iteration,exact,expansion\n";
        for (int k = 0; k <= a.iters; ++k) out << k << "," << ex.probability[k] << "," << ap.probability[k] << "\n";
    }
    {
        Mat c = grover_expand(g);
        auto out = o.open("grover_coefficients.csv");
        if (g.n == 1) {
            out << "k,c\n";
            for (int k = 0; k < c.rows(); ++k) out << k << "," << c(k, 0) << "\n";
        } else {
            out << "k\\l";
            for (int l = 0; l < c.cols(); ++l) out << "," << l;
            out << "\n";
            for (int k = 0; k < c.rows(); ++k) {
                out << k;
                for (int l = 0; l < c.cols(); ++l) out << "," << c(k, l);
                out << "\n";
            }
        }
        std::cout << "grover: L2 reconstruction error " << grover_l2_error(g, c) << "\n";
    }
    std::cout << "grover: target probability";
    for (double p : ex.probability) std::cout << " " << p;
    std::cout << " (exact); edge population " << ex.edge_population << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_bundle(const Output &o) {
    auto put = [&](const std::string &name, const json &j) { o.open(name) << j.dump(2) << "\n"; };
    put("table1.json", schedule_to_json(table1_schedule()));
    put("table2.json", schedule_to_json(gbs_compile(gbs_bundled4())));
    put("table3.json", schedule_to_json(iqp_compile(iqp_bundled())));
    put("table4.json", schedule_to_json(grover_compile(grover_bundled2d())));
    put("bundled4.json", gbs_to_json(gbs_bundled4()));
    put("desk2.json", gbs_to_json(gbs_desk2()));
    put("iqp4.json", iqp_to_json(iqp_bundled()));
    std::cout << "bundle: wrote schedules and instances to " << o.dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"cvcluster: measurement-based CV quantum computation on temporal cluster states"};
    app.require_subcommand(1);
    app.fallthrough();
    Output out;
    const char *env = std::getenv("CVC_OUT_DIR");
    out.dir = env ? env : ".";
    app.add_option("-o,--out", out.dir, "output directory (default $CVC_OUT_DIR or .)");
    app.add_flag("-f,--force", out.force, "overwrite existing outputs");

    ClusterArgs ca;
    auto *cluster = app.add_subcommand("cluster", "generate a 1D or 2D temporal cluster state");
    cluster->add_option("--dim", ca.dim, "1 or 2")->check(CLI::IsMember({1, 2}));
    cluster->add_option("--r", ca.r, "source squeezing");
    cluster->add_option("--M", ca.M, "second delay length (2D)")->check(CLI::PositiveNumber);
    cluster->add_option("--steps", ca.steps, "time steps")->check(CLI::PositiveNumber);
    cluster->add_flag("--uncoupled", ca.uncoupled, "leave the two 1D chains uncoupled");

    std::string schedule_path;
    std::optional<std::uint64_t> seed;
    auto *run = app.add_subcommand("run", "execute a measurement schedule");
    run->add_option("schedule", schedule_path, "schedule JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "RNG seed (required)");

    StateArgs sa;
    double extent = 5.0;
    int points = 101;
    auto *wig = app.add_subcommand("wigner", "Wigner function of a single-mode state on a grid");
    wig->add_option("--state", sa.kind, "vacuum|coherent|squeezed|fock|cubic|on|gkp");
    wig->add_option("--alpha", sa.alpha, "coherent amplitude, e.g. 0.3-0.2i");
    wig->add_option("--r", sa.r, "squeezing");
    wig->add_option("--n", sa.n, "Fock number");
    wig->add_option("--gamma", sa.gamma, "cubic strength");
    wig->add_option("--cutoff", sa.cutoff, "Fock cutoff");
    wig->add_option("--extent", extent, "grid half-width");
    wig->add_option("--points", points, "grid points per axis");

    PnrArgs pa;
    auto *pnr = app.add_subcommand("pnr", "photon-number-resolved heralding of a displaced squeezed input");
    pnr->add_option("--alpha", pa.alpha, "input displacement, e.g. 0.02+0.84i");
    pnr->add_option("--xi", pa.xi, "input squeezing");
    pnr->add_option("--r", pa.r, "two-mode squeezing of the heralding source");
    pnr->add_option("--k1", pa.k1, "first PNR outcome");
    pnr->add_option("--k2", pa.k2, "second PNR outcome");
    pnr->add_option("--cutoff", pa.cutoff, "Fock cutoff");
    pnr->add_option("--table", pa.table, "largest outcome in the probability table");
    pnr->add_flag("--wigner", pa.wigner, "also write the heralded Wigner grid");
    pnr->add_option("--extent", pa.extent, "Wigner grid half-width");
    pnr->add_option("--points", pa.points, "Wigner grid points per axis");

    std::string instance;
    int shots = 1000;
    std::optional<double> finite;
    auto *gbs = app.add_subcommand("gbs", "Gaussian boson sampling through the compiled schedule");
    gbs->add_option("--instance", instance, "GBS instance JSON")->required()->check(CLI::ExistingFile);
    gbs->add_option("--shots", shots, "number of samples")->check(CLI::PositiveNumber);
    gbs->add_option("--seed", seed, "RNG seed (required)");
    gbs->add_option("--finite", finite, "run with finite cluster squeezing r");

    GroverArgs ga;
    auto *grover = app.add_subcommand("grover", "CV Grover search success trace");
    grover->add_option("--N", ga.g.N, "number of regions");
    grover->add_option("--n", ga.g.n, "qumodes (1 or 2)");
    grover->add_option("--target", ga.g.target, "target region index");
    grover->add_option("--m", ga.g.m, "expansion order (first mode)");
    grover->add_option("--p", ga.g.p, "expansion order (second mode)");
    grover->add_option("--iters", ga.iters, "applications of the search operator")->check(CLI::NonNegativeNumber);
    grover->add_option("--cutoff", ga.g.cutoff, "Fock cutoff per mode");
    grover->add_option("--r", ga.g.squeeze, "x-squeezing of the initial state");
    grover->add_option("--half-width", ga.g.half_width, "regions tile [-h, h]^n");

    auto *bundle = app.add_subcommand("bundle", "write the bundled schedules and instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (cluster->parsed()) return cmd_cluster(ca, out);
        if (run->parsed()) {
            if (!seed) throw usage_error("run samples measurement outcomes; --seed is required");
            return cmd_run(schedule_path, *seed, out);
        }
        if (wig->parsed()) return cmd_wigner(sa, extent, points, out);
        if (pnr->parsed()) return cmd_pnr(pa, out);
        if (gbs->parsed()) {
            if (!seed) throw usage_error("gbs samples photon counts; --seed is required");
            return cmd_gbs(instance, shots, *seed, finite, out);
        }
        if (grover->parsed()) return cmd_grover(ga, out);
        if (bundle->parsed()) return cmd_bundle(out);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Usage:
                return kExitUsage;
            case ErrorKind::Numeric:
                return kExitNumeric;
            case ErrorKind::Validation:
            case ErrorKind::Singular:
                return kExitValidation;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
