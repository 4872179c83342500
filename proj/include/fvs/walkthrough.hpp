// Generated walkthrough of the pipeline on a 16x16 toy rig. Every number in
// the document comes from the library at generation time.
#pragma once

#include <filesystem>
#include <vector>

namespace fvs {

struct Walkthrough {
  std::filesystem::path document;            // walkthrough.md
  std::vector<std::filesystem::path> files;  // every raster written, PNG and PFM
};

Walkthrough generate_walkthrough(const std::filesystem::path& out_dir);

}  // namespace fvs
