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


// Acceptance run: one PASS/FAIL line per criterion, each under its time
// budget. Exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cvc/algorithms.h"
#include "cvc/fock.h"
#include "cvc/gaussian.h"
#include "cvc/macronode.h"
#include "cvc/resources.h"

namespace fs = std::filesystem;
using namespace cvc;

namespace {

fs::path g_work;

struct Verdict {
    bool ok;
    std::string detail;
};

struct Cli {
    int rc;
    std::string out;
};

Cli cli(const std::string &args) {
    fs::path log = g_work / "cli_stdout.txt";
    std::string cmd = std::string(CVC_CLI) + " --force -o " + g_work.string() + " " + args + " > " + log.string() +
                      " 2>&1";
    int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string data_file(const std::string &name) { return (fs::path(CVC_DATA_DIR) / name).string(); }

// Numeric rows of a CSV with one header line.
std::vector<std::vector<double>> read_csv(const std::string &name) {
    std::ifstream in(g_work / name);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

double wigner_min(const std::string &name) {
    double m = 1e9;
    for (const auto &row : read_csv(name)) m = std::min(m, row.at(2));
    return m;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

template <typename A, typename B>
double max_abs_diff(const A &a, const B &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

std::array<double, 2> random_pair(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-kPi, kPi);
    while (true) {
        double a = u(rng), b = u(rng);
        if (std::abs(std::sin(a - b)) > 0.2) return {a, b};
    }
}

// ---------------------------------------------------------------------------

Verdict macronode_oracle() {
    std::mt19937_64 rng(2026);
    double worst10 = 0, worst_single = 0;
    bool converging = true;
    for (int i = 0; i < 200; ++i) {
        auto [t1, t3] = random_pair(rng);
        Mat f = single_macronode(t1, t3).symplectic();
        double e10 = max_abs_diff(f, extract_implemented_symplectic(single_macronode_circuit(t1, t3, 10)));
        double e12 = max_abs_diff(f, extract_implemented_symplectic(single_macronode_circuit(t1, t3, 12)));
        worst_single = std::max(worst_single, e10);
        converging = converging && e12 < e10;

        auto [u1, u3] = random_pair(rng);
        auto [u2, u4] = random_pair(rng);
        std::array<double, 4> th{u1, u2, u3, u4};
        Mat g = two_mode_macronode(th).symplectic();
        double d10 = max_abs_diff(g, extract_implemented_symplectic(two_mode_macronode_circuit(th, 10)));
        double d12 = max_abs_diff(g, extract_implemented_symplectic(two_mode_macronode_circuit(th, 12)));
        worst10 = std::max(worst10, d10);
        converging = converging && d12 < d10;
    }
    bool ok = worst_single < 1e-5 && worst10 < 1e-5 && converging;
    return {ok, "max error at r=10: single " + fmt(worst_single) + ", two-mode " + fmt(worst10) +
                    (converging ? "; r=12 smaller for all" : "; r=12 not smaller for some tuple")};
}

Verdict pnr_closed_form() {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    int d = 30;
    double worst = 0;
    for (int trial = 0; trial < 5; ++trial) {
        CVec v = CVec::Zero(d);
        for (int k = 0; k < 12; ++k) v(k) = cplx(g(rng), g(rng)) * std::exp(-0.3 * k);
        FockState in = FockState::single(v / v.norm());
        for (int k1 = 0; k1 <= 6; ++k1) {
            for (int k2 = 0; k1 + k2 <= 6; ++k2) {
                auto a = pnr_output(in, {k1, k2, 0.5});
                auto b = pnr_oracle(in, {k1, k2, 0.5});
                worst = std::max(worst, (a.state.amps() - b.state.amps()).norm());
                worst = std::max(worst, std::abs(a.probability - b.probability));
            }
        }
    }
    return {worst < 1e-8, "max deviation " + fmt(worst) + " over 5 inputs, 28 outcomes each"};
}

Verdict pnr_negativity() {
    Cli a = cli("pnr --alpha 0.02+0.84i --xi 0.5 --r 0.68 --k1 3 --k2 2 --wigner");
    if (a.rc != 0) return {false, "pnr (3,2) exited " + std::to_string(a.rc)};
    double m1 = wigner_min("pnr_wigner.csv");
    Cli b = cli("pnr --alpha 0.02+0.84i --r 0.68 --k1 4 --k2 1 --wigner");
    if (b.rc != 0) return {false, "pnr (4,1) exited " + std::to_string(b.rc)};
    double m2 = wigner_min("pnr_wigner.csv");
    return {m1 < -0.01 && m2 < -0.01, "min W: squeezed (3,2) " + fmt(m1) + ", coherent (4,1) " + fmt(m2)};
}

Verdict pnr_outcome_claims() {
    Cli a = cli("pnr --alpha 0.02+0.84i --xi 0.5 --r 0.68 --table 6");
    if (a.rc != 0) return {false, "pnr exited " + std::to_string(a.rc)};
    auto sq = read_csv("pnr_probabilities.csv");
    double p22 = sq[2][1 + 2], p31 = sq[3][1 + 1];
    Cli b = cli("pnr --alpha 0.02+0.84i --r 0.68 --table 6");
    if (b.rc != 0) return {false, "pnr exited " + std::to_string(b.rc)};
    auto co = read_csv("pnr_probabilities.csv");
    int best = 0;
    for (int k1 = 0; k1 <= 5; ++k1) {
        if (co[k1][1 + 5 - k1] > co[best][1 + 5 - best]) best = k1;
    }
    bool ok = p22 > p31 && best != 5 - best;
    return {ok, "squeezed P(2,2)=" + fmt(p22) + " vs P(3,1)=" + fmt(p31) + "; coherent argmax at total 5 is (" +
                    std::to_string(best) + "," + std::to_string(5 - best) + ")"};
}

Verdict cubic_teleportation_fidelity() {
    int d = 40;
    FockState in = coherent_state(cplx(0.3, 0.2), d);
    double worst = 1;
    for (CubicOutcomes m : {CubicOutcomes{0, 0, 0}, CubicOutcomes{0.2, -0.3, 0.1}}) {
        double th = m.m1 == 0 ? 0.0 : 0.3;
        FockState sim = simulate_cubic_circuit(in, 10, 0.05, th, m, d);
        FockState formula = apply_op(in, cubic_teleportation(0.05, th, m).fock(d), 0);
        worst = std::min(worst, fidelity(sim, formula));
    }
    return {worst > 0.99, "min fidelity " + fmt(worst)};
}

Verdict on_state_identity() {
    auto op = on_effective_operator(0.05, 0.7);
    cplx ref = op.lhs(0.0) / op.rhs(0.0);
    double worst = 0, at = 0;
    for (int i = 0; i <= 1000; ++i) {
        double x = -5 + 0.01 * i;
        double dev = std::abs(op.lhs(x) / op.rhs(x) / ref - 1.0);
        if (dev > worst) worst = dev, at = x;
    }
    return {worst < 1e-3, "max relative deviation of the ratio " + fmt(worst) + " at x=" + fmt(at)};
}

Verdict gbs_cross_check() {
    GbsInstance g = gbs_desk2();
    int d = 20;
    Vec fock = gbs_fock_distribution(g, d);
    double worst = 0;
    for (int n0 = 0; n0 <= 4; ++n0) {
        for (int n1 = 0; n0 + n1 <= 4; ++n1) {
            worst = std::max(worst, std::abs(gbs_probability(g, {n0, n1}) - fock(n0 * d + n1)));
        }
    }
    Cli c = cli("gbs --instance " + data_file("bundled4.json") + " --shots 10000 --seed 1");
    if (c.rc != 0) return {false, "gbs exited " + std::to_string(c.rc)};
    auto pos = c.out.find("TV distance ");
    double tv = pos == std::string::npos ? 1.0 : std::stod(c.out.substr(pos + 12));
    return {worst < 1e-8 && tv < 0.05, "hafnian vs Fock " + fmt(worst) + "; 10^4-shot TV " + fmt(tv)};
}

Verdict iqp_rearrangement() {
    IqpCircuit c = iqp_random(3, 12, 2026);
    double diff = max_abs_diff(iqp_unitary(c, 12), iqp_unitary(iqp_rearrange(c), 12));
    return {diff < 1e-9, "max element difference " + fmt(diff)};
}

Verdict grover_amplification() {
    Cli c = cli("grover --N 4 --n 1 --m 20 --iters 4");
    if (c.rc != 0) return {false, "grover exited " + std::to_string(c.rc)};
    auto rows = read_csv("grover_trace.csv");
    double p0 = rows[0][1];
    double best = std::max(rows[1][1], rows[2][1]);
    double track = 0;
    for (const auto &r : rows) track = std::max(track, std::abs(r[1] - r[2]));
    bool ok = p0 > 0.5 / 4 && p0 < 1.5 / 4 && best > 0.5 && track <= 0.05;
    return {ok, "start " + fmt(p0) + ", best within 2 applications " + fmt(best) +
                    ", max |exact - expansion| " + fmt(track)};
}

Verdict hermite_refinement() {
    GroverInstance g;
    std::string detail = "1D";
    bool ok = true;
    double prev = 1e9;
    for (int m : {5, 10, 20}) {
        g.m = m;
        double e = grover_l2_error(g, grover_expand(g));
        ok = ok && e < prev;
        prev = e;
        detail += " " + fmt(e);
    }
    g.n = 2;
    prev = 1e9;
    detail += "; 2D";
    for (int m : {3, 5, 10}) {
        g.m = g.p = m;
        double e = grover_l2_error(g, grover_expand(g), 4.0, 161);
        ok = ok && e < prev;
        prev = e;
        detail += " " + fmt(e);
    }
    return {ok, "L2 errors " + detail};
}

Verdict schedule_integrity() {
    std::string detail;
    bool ok = true;
    int expect[] = {4, 29, 39, 27};
    for (int t = 1; t <= 4; ++t) {
        std::string path = data_file("table" + std::to_string(t) + ".json");
        Schedule s = load_schedule(path);
        validate_schedule(s);
        Cli c = cli("run " + path + " --seed 7");
        std::ifstream in(g_work / "trace.jsonl");
        int lines = 0;
        for (std::string l; std::getline(in, l);) lines += !l.empty();
        bool good = c.rc == 0 && static_cast<int>(s.steps.size()) == expect[t - 1] && lines == expect[t - 1];
        ok = ok && good;
        detail += (t > 1 ? ", " : "") + std::string("table") + std::to_string(t) + " rc=" + std::to_string(c.rc) +
                  " steps=" + std::to_string(lines);
    }
    return {ok, detail};
}

}  // namespace

int main() {
    g_work = fs::temp_directory_path() / ("cvc_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(g_work);

    struct Criterion {
        const char *name;
        double budget_s;
        std::function<Verdict()> run;
    };
    std::vector<Criterion> all = {
        {"1 macronode oracle equivalence", 30, macronode_oracle},
        {"2 PNR closed form vs brute force", 60, pnr_closed_form},
        {"3 heralded Wigner negativity", 60, pnr_negativity},
        {"4 PNR outcome statistics", 60, pnr_outcome_claims},
        {"5 cubic teleportation", 120, cubic_teleportation_fidelity},
        {"6 ON-state effective operator", 5, on_state_identity},
        {"7 GBS cross-check", 120, gbs_cross_check},
        {"8 IQP rearrangement", 60, iqp_rearrangement},
        {"9 Grover amplification", 120, grover_amplification},
        {"10 Hermite refinement", 30, hermite_refinement},
        {"11 schedule integrity", 120, schedule_integrity},
    };

    int failed = 0;
    for (const auto &c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception &e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            v.ok = false;
            v.detail += "; over time budget";
        }
        failed += !v.ok;
        std::cout << (v.ok ? "PASS" : "FAIL") << "  " << c.name << "  (" << fmt(secs) << " s of " << c.budget_s
                  << ")  " << v.detail << std::endl;
    }
    fs::remove_all(g_work);
    std::cout << (all.size() - failed) << "/" << all.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
