#pragma once

#include <stdexcept>
#include <string>

namespace idea23d {

// Base for all domain errors. `stage` names the pipeline stage that failed so
// the CLI can print it next to the message.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& message)
        : std::runtime_error(message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error("validate", msg) {}
};

class RenderError : public Error {
public:
    explicit RenderError(const std::string& msg) : Error("render", msg) {}
};

class TransportError : public Error {
public:
    TransportError(const std::string& role, const std::string& msg)
        : Error("backend:" + role, msg) {}
};

class EmptyResponse : public Error {
public:
    explicit EmptyResponse(const std::string& role)
        : Error("backend:" + role, "backend returned an empty completion") {}
};

class BackendContractViolation : public Error {
public:
    BackendContractViolation(const std::string& role, const std::string& msg)
        : Error("backend:" + role, msg) {}
};

class EmptyForeground : public Error {
public:
    EmptyForeground() : Error("rembg", "background removal left no foreground pixels") {}
};

class PromptParseError : public Error {
public:
    explicit PromptParseError(const std::string& msg) : Error("prompt-gen", msg) {}
};

class AllDraftsFailed : public Error {
public:
    explicit AllDraftsFailed(const std::string& msg) : Error("draft-fanout", msg) {}
};

class MemoryOrderError : public Error {
public:
    explicit MemoryOrderError(const std::string& msg) : Error("memory", msg) {}
};

class LoadError : public Error {
public:
    explicit LoadError(const std::string& msg) : Error("session-load", msg) {}
};

class MetricError : public Error {
public:
    explicit MetricError(const std::string& msg) : Error("metric", msg) {}
};

class DatasetError : public Error {
public:
    explicit DatasetError(const std::string& msg) : Error("dataset", msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io", msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

}  // namespace idea23d
