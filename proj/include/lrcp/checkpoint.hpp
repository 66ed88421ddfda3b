#pragma once

#include <string>

#include "lrcp/training.hpp"

namespace lrcp {

// Self-describing JSON checkpoint: every parameter tensor stored under its
// name with an explicit shape, plus the fitted ECDF tables and the model
// metadata needed to rebuild inputs. format_version guards the layout.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Writes to path + ".tmp" and renames, so readers never see a torn file.
void atomic_write_text(const std::string& path, const std::string& contents);

}  // namespace lrcp
