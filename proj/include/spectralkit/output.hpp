#pragma once

#include <chrono>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "spectralkit/grid.hpp"
#include "spectralkit/params.hpp"
#include "spectralkit/records.hpp"
#include "spectralkit/solver_info.hpp"

namespace spectralkit {

class Simulation;

// Computes shell-binned diagnostics; exposed for direct testing.
struct ShellSpectrum {
    std::vector<double> k;  // shell centers, s * delta_k
    std::vector<double> v;  // one value per shell
};

// Gathers per-mode values into shells: v[s] = sum over modes with
// shell index s, divided by delta_k when density is true.
ShellSpectrum bin_shells(const SpectralGrid& grid, const std::vector<double>& per_mode,
                         bool density);

// Longitudinal structure functions S_p(r) along one axis via periodic
// shifts; r = j*dx for j = 1..n/2.
struct StructureFunctions {
    std::vector<double> r;
    std::vector<std::vector<double>> s;  // one row per order p
};
StructureFunctions structure_functions(const SpectralGrid& grid, const real_field& u,
                                       int axis, const std::vector<int>& orders);

// Owns the simulation directory and all output streams: params.txt,
// info_solver.txt, run.log, .ndrec records, snapshots/.  Created before
// the state exists; attach() wires it to the running simulation.
class OutputManager {
public:
    OutputManager(const ParamTree& params, const SolverInfo& info);
    ~OutputManager();

    void attach(Simulation& sim) { sim_ = &sim; }

    bool files_enabled() const { return enable_files_; }
    const std::string& dir() const { return dir_; }

    void set_quiet(bool q) { quiet_ = q; }
    bool quiet() const { return quiet_; }

    // Appends to run.log (kept in memory when files are off).
    void log(const std::string& line);

    void on_run_start();
    void after_step();
    void on_run_end();

    // Formatted progress line for the current state.
    std::string stdout_line();
    // Parses a progress line; z is ignored when the line has no Z field.
    // Returns false on lines that do not match the documented shape.
    static bool parse_stdout_line(const std::string& line, long& it, double& t,
                                  double& dt, double& e, double& z, bool& has_z,
                                  double& wall);

    // Writes spectra/budget/increments records and a snapshot now.
    void save_records_and_snapshot();

    double walltime() const;

private:
    void write_means();
    void print_progress();

    Simulation* sim_ = nullptr;
    bool enable_files_ = true;
    bool quiet_ = false;
    std::string dir_;
    double period_save_ = 0.5;
    long period_print_ = 10;
    double next_save_t_ = 0.0;
    double last_saved_t_ = -1.0;
    bool started_ = false;

    std::unique_ptr<NdrecWriter> means_, spectra_, budget_, increments_;
    std::ofstream runlog_;
    std::vector<std::string> pending_log_;
    std::chrono::steady_clock::time_point wall_start_;
};

}  // namespace spectralkit
