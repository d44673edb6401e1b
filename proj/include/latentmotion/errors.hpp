#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latentmotion {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputTooShortError : public Error {
public:
    using Error::Error;
};

class EventDetectionError : public Error {
public:
    using Error::Error;
};

class WindowingError : public Error {
public:
    WindowingError(std::string trial_id, const std::string& what)
        : Error(what), trial_id_(std::move(trial_id)) {}
    const std::string& trial_id() const noexcept { return trial_id_; }

private:
    std::string trial_id_;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Raised when a pooled feature has zero variance and cannot be z-scored.
class DegenerateFeatureError : public Error {
public:
    DegenerateFeatureError(std::size_t feature, const std::string& what)
        : Error(what), feature_(feature) {}
    std::size_t feature_index() const noexcept { return feature_; }

private:
    std::size_t feature_;
};

class ContractError : public Error {
public:
    using Error::Error;
};

/// Non-finite activations; `stage` names the layer that produced them.
class NumericError : public Error {
public:
    NumericError(std::string stage, const std::string& what)
        : Error(what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class IntegrationError : public Error {
public:
    IntegrationError(std::size_t step, const std::string& what) : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(int epoch, int step, const std::string& what)
        : Error(what), epoch_(epoch), step_(step) {}
    int epoch() const noexcept { return epoch_; }
    int step() const noexcept { return step_; }

private:
    int epoch_;
    int step_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace latentmotion
