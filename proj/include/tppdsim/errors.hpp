#ifndef TPPDSIM_ERRORS_HPP
#define TPPDSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tppd {

// Base class for every error raised by the simulator.
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Victim selection could not find a block outside the excluded process.
// Reaching this is a caller bug: the threshold bounds guarantee eligibility.
class NoEligibleVictim : public SimError {
public:
    explicit NoEligibleVictim(const std::string& what) : SimError(what) {}
};

// An access was issued by a pid that is not bound to any core.
class UnknownProcess : public SimError {
public:
    explicit UnknownProcess(const std::string& what) : SimError(what) {}
};

// A second suspicious pair was flagged on a set that is already engaged.
class AlreadyEngaged : public SimError {
public:
    explicit AlreadyEngaged(const std::string& what) : SimError(what) {}
};

// A spy/trojan block counter left its legal range; accounting bug.
class CounterError : public SimError {
public:
    explicit CounterError(const std::string& what) : SimError(what) {}
};

// Occupancy series with zero variance; correlation is undefined.
class DegenerateTrace : public SimError {
public:
    explicit DegenerateTrace(const std::string& what) : SimError(what) {}
};

// Trace file could not be parsed; message carries the line number.
class ParseError : public SimError {
public:
    explicit ParseError(const std::string& what) : SimError(what) {}
};

// Experiment configuration is invalid; message carries the field path.
class ConfigError : public SimError {
public:
    explicit ConfigError(const std::string& what) : SimError(what) {}
};

// Average impact requested over an empty benchmark list.
class EmptyBenchmarkSet : public SimError {
public:
    explicit EmptyBenchmarkSet(const std::string& what) : SimError(what) {}
};

// Report or trace file could not be read or written.
class IoError : public SimError {
public:
    explicit IoError(const std::string& what) : SimError(what) {}
};

} // namespace tppd

#endif
