#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cip/core.hpp"
#include "cip/worlds/attribute_world.hpp"
#include "cip/worlds/instance_world.hpp"

namespace cip {

struct MiscalibrationSpec {
    double temperature = 1.0;
    std::vector<double> bias;  // optional, added in log space
};

Distribution miscalibrate(const Distribution& d, const MiscalibrationSpec& spec);

class ExactPosteriorPredictor : public Predictor {
public:
    explicit ExactPosteriorPredictor(const AttributeWorld& world) : world_(world) {}
    Distribution predict(const History& h, const Subject&) const override { return exact_posterior(world_, h); }

private:
    const AttributeWorld& world_;
};

class MiscalibratedPredictor : public Predictor {
public:
    MiscalibratedPredictor(const Predictor& base, MiscalibrationSpec spec) : base_(base), spec_(std::move(spec)) {}
    Distribution predict(const History& h, const Subject& s) const override {
        return miscalibrate(base_.predict(h, s), spec_);
    }
    bool concurrent_safe() const override { return base_.concurrent_safe(); }

private:
    const Predictor& base_;
    MiscalibrationSpec spec_;
};

// Oracle double: all mass on the subject's label, whatever the history.
class TruthPointMassPredictor : public Predictor {
public:
    explicit TruthPointMassPredictor(std::size_t num_labels) : n_(num_labels) {}
    Distribution predict(const History&, const Subject& s) const override { return Distribution::point_mass(n_, s.label); }

private:
    std::size_t n_;
};

class ConstantPredictor : public Predictor {
public:
    explicit ConstantPredictor(Distribution d) : d_(std::move(d)) {}
    Distribution predict(const History&, const Subject&) const override { return d_; }

private:
    Distribution d_;
};

// Naive Bayes over (question text, answer text) pairs with option texts as
// classes, fit on a set of training datapoints. Histories are scored against
// the options of the subject's own instance.
class NaiveBayesInstancePredictor : public Predictor {
public:
    NaiveBayesInstancePredictor(const InstanceWorld& world, const std::vector<std::size_t>& training);
    Distribution predict(const History& h, const Subject& s) const override;

private:
    const InstanceWorld& world_;
    std::map<std::string, double> class_count_;
    // question -> answer -> class -> count
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> counts_;
    std::map<std::string, std::map<std::string, double>> totals_;  // question -> class -> count
    double n_train_ = 0.0;
};

}  // namespace cip
