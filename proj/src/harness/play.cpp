#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>

#include "cip/harness.hpp"
#include "internal.hpp"

namespace cip::harness {

namespace {

std::string trimmed_lower(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out = s.substr(b, e - b);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::optional<Answer> TerminalAnswerer::answer(const Query& q, SeededRng&) {
    ++asked_;
    out_ << "Q" << asked_ << ": " << q.text << (free_text_ ? " [answer, q to quit] " : " [y/n, q to quit] ");
    out_.flush();
    std::string line;
    while (std::getline(in_, line)) {
        const std::string reply = trimmed_lower(line);
        if (reply == "q" || reply == "quit") return std::nullopt;
        if (!free_text_) {
            if (reply == "y" || reply == "yes") return Answer::yes();
            if (reply == "n" || reply == "no") return Answer::no();
            out_ << "Please reply y or n (q to quit): ";
        } else if (!reply.empty()) {
            return Answer::free_text(line);
        } else {
            out_ << "Please type an answer (q to quit): ";
        }
        out_.flush();
    }
    return std::nullopt;
}

RunRecord interactive_play(const ExperimentConfig& cfg, const StrategyConfig& strategy, std::uint64_t seed,
                           std::istream& in, std::ostream& out) {
    if (!detail::is_attribute(cfg.world.kind)) fail(ErrorKind::configuration, "play needs a closed attribute world");
    if (strategy.kind == StrategyKind::dp || strategy.query_set == QuerySetMode::open) {
        fail(ErrorKind::configuration, "play supports closed-set strategies only");
    }
    detail::LoadedWorld lw = detail::load_world(cfg.world);
    std::unique_ptr<detail::LlmSession> session;
    if (cfg.predictor.kind == PredictorKind::llm) session = std::make_unique<detail::LlmSession>(cfg);
    detail::GroupOracles g = detail::build_oracles(cfg, lw, session ? session->client.get() : nullptr, nullptr);

    StrategyConfig sc = strategy;
    sc.max_iters = cfg.max_iters;
    std::optional<CalibrationTable> table;
    if (sc.kind == StrategyKind::cip) {
        if (!sc.alpha) {
            if (cfg.alphas.empty()) fail(ErrorKind::configuration, "cip needs an alpha");
            sc.alpha = cfg.alphas.front();
        }
        SeededRng crng(seed, detail::calibration_stream(0));
        table = calibrate_lengths(*g.histories, *g.predictor, *sc.alpha, cfg.max_iters, cfg.n_cal, crng, cfg.jitter,
                                  g.predictor->concurrent_safe() ? cfg.workers : 1);
    }

    const LabelSpace& labels = lw.attr->labels();
    out << "Think of one of:";
    for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? ", " : " ") << labels.name(i);
    out << "\n";

    TerminalAnswerer answerer(in, out);
    EpisodeSetup setup{lw.attr.get(), 0, std::nullopt, "human"};
    EpisodeOracles oracles{g.predictor, g.hypotheses.get(), nullptr, table ? &*table : nullptr, &answerer};
    EpisodeOptions options;
    options.on_row = [&](const RunRow& row) {
        if (row.stopped) {
            out << "Stopping: the remaining questions are equally uninformative.\n";
            return;
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f", row.posterior[row.prediction]);
        out << "  top guess: " << labels.name(row.prediction) << " (" << buf << ")";
        if (row.set_size) out << ", prediction set size " << *row.set_size;
        out << "\n";
    };
    SeededRng rng(seed, 0);
    RunRecord rec = run_episode(sc, setup, oracles, rng, options);
    const std::size_t guess = rec.rows.empty() ? rec.initial_prediction : rec.rows.back().prediction;
    out << "Final guess: " << labels.name(guess) << " [" << rec.status << "]\n";
    return rec;
}

}  // namespace cip::harness
