// plots.hpp - matplotlib scripts emitted next to the data files

#pragma once

#include <cstddef>
#include <string>

namespace qbm::cli {

std::string trajectory_plot_script(bool single, std::size_t runs);
std::string coefficients_plot_script();
std::string phase_diagram_plot_script();

}  // namespace qbm::cli
