#pragma once

#include <stdexcept>
#include <string>

namespace narrownav
{
    /// Invalid configuration or input data (maps to CLI exit code 2).
    class ConfigError : public std::runtime_error
    {
      public:
        using std::runtime_error::runtime_error;
    };

    /// API used out of order, e.g. stepping a finished episode.
    class LifecycleError : public std::logic_error
    {
      public:
        using std::logic_error::logic_error;
    };

    /// Numerical breakdown during learning (non-finite loss).
    class TrainingFault : public std::runtime_error
    {
      public:
        using std::runtime_error::runtime_error;
    };

    class IoError : public std::runtime_error
    {
      public:
        using std::runtime_error::runtime_error;
    };
}  // namespace narrownav
