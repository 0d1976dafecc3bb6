#pragma once

#include <optional>
#include <string_view>

namespace mcesim {

// Contents of a file under data/ compiled into the library, keyed by its
// path relative to data/ (e.g. "mi200.latency", "fixtures/mi200_gem5.tbl").
std::optional<std::string_view> embedded_file(std::string_view name);

}  // namespace mcesim
