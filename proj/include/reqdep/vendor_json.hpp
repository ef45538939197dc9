#pragma once

// nlohmann/json is shipped as vendor/json.hpp (also available system-wide).
#if __has_include(<json.hpp>)
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif
