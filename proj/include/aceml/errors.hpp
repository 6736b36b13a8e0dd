#pragma once

#include <stdexcept>
#include <string>

namespace aceml {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

class RankDeficient : public Error {
public:
    RankDeficient(const std::string& msg, int rank, int expected)
        : Error(msg), rank(rank), expected(expected) {}
    int rank;
    int expected;
};

class NotConverged : public Error {
public:
    explicit NotConverged(const std::string& msg) : Error(msg) {}
};

class DivergedLoss : public Error {
public:
    explicit DivergedLoss(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class ZeroVariance : public Error {
public:
    ZeroVariance(const std::string& msg, int feature) : Error(msg), feature(feature) {}
    int feature;
};

class SameFeature : public Error {
public:
    explicit SameFeature(const std::string& msg) : Error(msg) {}
};

class UnknownScenario : public Error {
public:
    explicit UnknownScenario(const std::string& msg) : Error(msg) {}
};

class NoAnalyticTruth : public Error {
public:
    explicit NoAnalyticTruth(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace aceml
