// Generates the step-interface mesh on (0,12)x(0,6): a triangulated uniform
// grid with a piecewise-constant interface alternating between y = 2.25 and
// y = 1.5 every two base columns. Cells above the step are tagged B, cells
// below D; interface edges are tagged explicitly.
#include "sdg/mesh.hpp"
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  std::string out;
  int refine = 1;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--refine" && i + 1 < argc) {
      refine = std::stoi(argv[++i]);
    } else if (a == "--help" || a == "-h") {
      std::printf("usage: make-step-mesh [--refine n] out.mesh\n");
      return 0;
    } else {
      out = a;
    }
  }
  if (out.empty() || refine < 1) {
    std::fprintf(stderr, "usage: make-step-mesh [--refine n] out.mesh\n");
    return 2;
  }

  const double hx = 0.75 / refine;
  const int nx = 16 * refine, ny = 8 * refine;
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  // step height in grid rows for a given cell column
  auto hrow = [refine](int c) {
    int base = c / refine;             // column of the 0.75 grid
    return ((base / 2) % 2 == 0 ? 3 : 2) * refine;
  };
  auto sub = [&](int c, int r) { return r >= hrow(c) ? 'B' : 'D'; };

  std::ofstream f(out);
  f << "# step-interface demo mesh\n";
  f << "staggered-mesh v1\n";
  f << "vertices " << (nx + 1) * (ny + 1) << "\n";
  char buf[128];
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      std::snprintf(buf, sizeof buf, "%.10g %.10g\n", i * hx, j * hx);
      f << buf;
    }

  f << "cells " << 2 * nx * ny << "\n";
  for (int r = 0; r < ny; ++r)
    for (int c = 0; c < nx; ++c) {
      int v00 = vid(c, r), v10 = vid(c + 1, r), v01 = vid(c, r + 1), v11 = vid(c + 1, r + 1);
      f << "3 " << v00 << " " << v10 << " " << v11 << " " << sub(c, r) << "\n";
      f << "3 " << v00 << " " << v11 << " " << v01 << " " << sub(c, r) << "\n";
    }

  std::vector<std::string> bnd;
  auto add = [&](int a, int b, const char* tag) {
    bnd.push_back(std::to_string(a) + " " + std::to_string(b) + " " + tag);
  };
  for (int c = 0; c < nx; ++c) {
    add(vid(c, 0), vid(c + 1, 0), "GD");    // bottom: pressure boundary
    add(vid(c, ny), vid(c + 1, ny), "GB");  // top
    // horizontal interface segments between vertically adjacent cells
    for (int r = 1; r < ny; ++r)
      if (sub(c, r - 1) != sub(c, r)) add(vid(c, r), vid(c + 1, r), "IF");
  }
  for (int r = 0; r < ny; ++r) {
    add(vid(0, r), vid(0, r + 1), sub(0, r) == 'B' ? "GB" : "GD");
    add(vid(nx, r), vid(nx, r + 1), sub(nx - 1, r) == 'B' ? "GB" : "GD");
    // vertical interface segments at the step risers
    for (int c = 1; c < nx; ++c)
      if (sub(c - 1, r) != sub(c, r)) add(vid(c, r), vid(c, r + 1), "IF");
  }
  f << "boundary " << bnd.size() << "\n";
  for (const std::string& s : bnd) f << s << "\n";
  return 0;
}
