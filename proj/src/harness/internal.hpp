#pragma once

#include <memory>
#include <vector>

#include "cip/harness.hpp"
#include "cip/llm/mock_server.hpp"

namespace cip::harness::detail {

struct LoadedWorld {
    std::unique_ptr<AttributeWorld> attr;
    std::unique_ptr<InstanceWorld> inst;

    const World& world() const {
        if (attr) return *attr;
        return *inst;
    }
};

bool is_attribute(WorldSourceKind k);
LoadedWorld load_world(const WorldSource& src);

// Client plus, when a fixture is configured, the mock server it talks to.
struct LlmSession {
    explicit LlmSession(const ExperimentConfig& cfg);
    ~LlmSession();
    std::unique_ptr<llm::MockServer> server;
    std::unique_ptr<llm::Client> client;
};

struct GroupOracles {
    std::vector<std::unique_ptr<Predictor>> predictors;
    const Predictor* predictor = nullptr;
    std::unique_ptr<QueryProposer> proposer;
    std::unique_ptr<HypothesisSampler> hypotheses;
    std::unique_ptr<HistorySampler> histories;
    std::vector<std::size_t> test;
};

GroupOracles build_oracles(const ExperimentConfig& cfg, const LoadedWorld& lw, llm::Client* client,
                           const Split* split);

std::uint64_t episode_stream(std::size_t fold, std::size_t strategy, std::size_t subject);
std::uint64_t calibration_stream(std::size_t fold);

}  // namespace cip::harness::detail
