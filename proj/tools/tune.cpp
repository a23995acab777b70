// Copyright 2026 The swabbot Authors
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

// Brute-force sweep used to pick the locked tissue profiles.
//
// Scales the baseline knots and the peak amplitudes of a starting profile,
// runs the standard script for every seed, and lists the candidates whose
// pooled mean falls within --mean +- --tolerance and whose worst max stays at
// or below --max, closest mean first.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "CLI11.hpp"
#include "swabbot/config.hpp"
#include "swabbot/control_loop.hpp"
#include "swabbot/session.hpp"
#include "swabbot/system_config.hpp"
#include "swabbot/tissue.hpp"

using namespace swabbot;

namespace {

struct Candidate {
    double baseline_scale;
    double peak_scale;
    double mean;
    double std;
    double max;
};

std::vector<double> steps(double lo, double hi, double step) {
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double v = lo + step * i;
        if (v > hi + 1e-12) break;
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sweep tissue profile scales against the standard scripted run"};
    std::string profile = "phantom";
    std::vector<std::uint64_t> seeds{1};
    std::vector<double> bscale{0.8, 1.4, 0.05};
    std::vector<double> pscale{0.6, 1.4, 0.05};
    double target_mean = 0.35;
    double tolerance = 0.05;
    double max_bound = 0.87;
    std::size_t top = 15;
    app.add_option("--profile", profile)->check(CLI::IsMember({"phantom", "pig"}));
    app.add_option("--seed", seeds);
    app.add_option("--baseline-scale", bscale, "lo hi step")->expected(3);
    app.add_option("--peak-scale", pscale, "lo hi step")->expected(3);
    app.add_option("--mean", target_mean);
    app.add_option("--tolerance", tolerance);
    app.add_option("--max", max_bound);
    app.add_option("--top", top);
    CLI11_PARSE(app, argc, argv);

    const auto cfg = system_config_from(KeyValueConfig{});
    const auto curve = calibrate_from_config(cfg);
    const auto script = make_standard_script(cfg);

    std::vector<Candidate> hits;
    std::size_t tried = 0;
    for (double b : steps(bscale[0], bscale[1], bscale[2])) {
        for (double p : steps(pscale[0], pscale[1], pscale[2])) {
            ++tried;
            double mean_sum = 0.0;
            double std_sum = 0.0;
            double worst = 0.0;
            for (auto seed : seeds) {
                auto prof = profile == "pig" ? make_pig_profile(seed) : make_phantom_profile();
                for (auto& k : prof.baseline) k.force_n *= b;
                for (auto& pk : prof.peaks) pk.amplitude_n *= p;
                ControlLoop loop(cfg, prof, curve, seed);
                SessionRecorder session(loop);
                ScriptTransport transport(script);
                run_session(session, transport);
                const auto s = summarize(session.rows());
                mean_sum += s.pooled.mean_n;
                std_sum += s.pooled.std_n;
                worst = std::max(worst, s.pooled.max_n);
            }
            const double n = static_cast<double>(seeds.size());
            const Candidate c{b, p, mean_sum / n, std_sum / n, worst};
            if (std::abs(c.mean - target_mean) <= tolerance && c.max <= max_bound) hits.push_back(c);
        }
    }
    std::sort(hits.begin(), hits.end(), [&](const Candidate& a, const Candidate& c) {
        return std::abs(a.mean - target_mean) < std::abs(c.mean - target_mean);
    });
    std::printf("tried %zu, accepted %zu\n", tried, hits.size());
    std::printf("baseline_scale peak_scale mean std max\n");
    for (std::size_t i = 0; i < std::min(top, hits.size()); ++i) {
        const auto& c = hits[i];
        std::printf("%.3f %.3f %.4f %.4f %.4f\n", c.baseline_scale, c.peak_scale, c.mean, c.std, c.max);
    }
    return 0;
}
