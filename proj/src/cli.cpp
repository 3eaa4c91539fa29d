#include "turnscan/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <map>
#include <optional>

#include "turnscan/io.hpp"
#include "turnscan/pipeline.hpp"
#include "turnscan/shapes.hpp"

namespace turnscan {
namespace {

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// Keys whose default prints as on/off also accept a bare flag.
bool is_switch_key(const std::string& key) {
  const std::string text = format_config(PipelineConfig{});
  return text.find("\n" + key + " = on\n") != std::string::npos ||
         text.find("\n" + key + " = off\n") != std::string::npos;
}

/// Config flags shared by simulate and reconstruct.
struct ConfigFlags {
  std::string config_file;
  bool print_config = false;
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "key = value configuration file");
    app.add_flag("--print-config", print_config, "print the effective configuration and exit");
    for (const std::string& key : config_keys()) {
      CLI::Option* opt = app.add_option(flag_name(key), values[key], "config key " + key);
      if (is_switch_key(key)) opt->expected(0, 1);
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      options[key] = opt;
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig config;
    if (!config_file.empty()) {
      const Bytes bytes = read_file(config_file);
      config = parse_config(std::string(bytes.begin(), bytes.end()));
    }
    for (const std::string& key : config_keys()) {
      const CLI::Option* opt = options.at(key);
      if (opt->count() == 0) continue;
      const auto& v = values.at(key);
      set_config_value(config, key, v.empty() || v.back().empty() ? std::string("on") : v.back());
    }
    return config;
  }
};

TriangleMesh weld(const TriangleMesh& soup) {
  TriangleMesh mesh;
  std::map<std::array<double, 3>, std::uint32_t> index;
  mesh.triangles.reserve(soup.triangles.size());
  for (const Triangle& t : soup.triangles) {
    Triangle out;
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = soup.vertices[t[k]];
      const auto [it, inserted] =
          index.try_emplace({p.x(), p.y(), p.z()}, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (inserted) mesh.vertices.push_back(p);
      out[k] = it->second;
    }
    mesh.triangles.push_back(out);
  }
  return mesh;
}

bool has_extension(const std::string& path, const std::string& ext) {
  std::string e = std::filesystem::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

TriangleMesh read_mesh(const std::string& path) {
  const Bytes bytes = read_file(path);
  if (has_extension(path, ".stl")) return weld(read_stl(bytes));
  PlyContent content = read_ply(bytes);
  if (auto* mesh = std::get_if<TriangleMesh>(&content)) return std::move(*mesh);
  throw InvalidInput(path + " holds a point cloud, not a mesh");
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("turnscan: turntable scan-to-print point cloud toolkit", "turnscan");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread count (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);

  CLI::App* simulate = app.add_subcommand("simulate", "scan a built-in shape in the turntable simulator");
  ConfigFlags sim_flags;
  std::optional<std::uint64_t> seed;
  std::string sim_out;
  bool dump_depth = false;
  sim_flags.attach(*simulate);
  simulate->add_option("--seed", seed, "noise seed (required)");
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_flag("--dump-depth", dump_depth, "also write the filtered depth images as 16-bit PGM");

  CLI::App* reconstruct = app.add_subcommand("reconstruct", "scan directory to watertight mesh");
  ConfigFlags rec_flags;
  std::string rec_in, rec_out, report_path;
  rec_flags.attach(*reconstruct);
  reconstruct->add_option("--input", rec_in, "directory of *.ply clouds in capture order");
  reconstruct->add_option("--out", rec_out, "output directory");
  reconstruct->add_option("--report", report_path, "write the cumulative transforms to this file");

  CLI::App* audit = app.add_subcommand("audit", "print topology counts of a mesh (ply or stl)");
  std::string audit_path;
  audit->add_option("mesh", audit_path, "mesh file")->required();

  CLI::App* convert = app.add_subcommand("convert", "convert a mesh between ply and stl");
  std::string convert_in, convert_out;
  bool ascii = false;
  convert->add_option("input", convert_in, "input mesh")->required();
  convert->add_option("output", convert_out, "output mesh")->required();
  convert->add_flag("--ascii", ascii, "write ascii PLY");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  auto usage = [&](const std::string& what) {
    err << "usage error: " << what << "\n";
    return kExitUsage;
  };

  PipelineConfig config;
  try {
    if (simulate->parsed()) config = sim_flags.resolve();
    if (reconstruct->parsed()) config = rec_flags.resolve();
  } catch (const ConfigError& e) {
    return usage(e.what());
  } catch (const Error& e) {
    return usage(e.what());
  }

  try {
    if (simulate->parsed()) {
      if (sim_flags.print_config) {
        out << format_config(config);
        return kExitOk;
      }
      if (!seed) return usage("simulate requires --seed");
      if (sim_out.empty()) return usage("simulate requires --out");
      const TriangleMesh shape = make_named_shape(config.shape);
      const ScanSession session = simulate_scan(shape, config.scan, *seed);
      std::filesystem::create_directories(sim_out);
      const std::filesystem::path dir(sim_out);
      std::vector<RigidTransform> truth;
      for (std::size_t i = 0; i < session.clouds.size(); ++i) {
        write_file(dir / cloud_file_name(i), write_ply(session.clouds[i], PlyFormat::binary_little_endian));
        truth.push_back(compose(session.object_to_view[0], invert(session.object_to_view[i])));
        if (dump_depth) {
          char name[32];
          std::snprintf(name, sizeof name, "depth_%03zu.pgm", i);
          write_file(dir / name, write_pgm(session.depth_images[i]));
        }
      }
      write_text_file(dir / "truth_transforms.txt", format_transforms(truth));
      TriangleMesh reference = shape;
      for (Vec3& v : reference.vertices) v = session.object_to_view[0].apply(v);
      write_file(dir / "ground_truth.ply", write_ply(reference, PlyFormat::binary_little_endian));
      out << "views: " << session.clouds.size() << "\n";
      out << "final_angle: " << session.final_state.angle << "\n";
      return kExitOk;
    }

    if (reconstruct->parsed()) {
      if (rec_flags.print_config) {
        out << format_config(config);
        return kExitOk;
      }
      if (rec_in.empty()) return usage("reconstruct requires --input");
      if (rec_out.empty()) return usage("reconstruct requires --out");
      std::vector<PointCloud> clouds;
      try {
        clouds = load_scan_directory(rec_in);
      } catch (const std::exception& e) {
        throw StageError("acquire", e.what());
      }
      const PipelineRun run = run_pipeline(config, std::move(clouds), rec_out);
      if (!report_path.empty()) write_text_file(report_path, format_transforms(run.alignment.cumulative));
      out << "boundary_edges: " << run.audit.boundary_edges << "\n";
      out << "non_manifold_edges: " << run.audit.non_manifold_edges << "\n";
      out << "triangles: " << run.mesh.triangles.size() << "\n";
      return kExitOk;
    }

    if (audit->parsed()) {
      const MeshAudit a = mesh_audit(read_mesh(audit_path));
      out << "boundary_edges: " << a.boundary_edges << "\n";
      out << "non_manifold_edges: " << a.non_manifold_edges << "\n";
      out << "euler_characteristic: " << a.euler_characteristic << "\n";
      out << "connected_components: " << a.connected_components << "\n";
      return kExitOk;
    }

    if (convert->parsed()) {
      const TriangleMesh mesh = read_mesh(convert_in);
      if (has_extension(convert_out, ".stl")) {
        write_file(convert_out, write_stl(mesh));
      } else if (has_extension(convert_out, ".ply")) {
        write_file(convert_out, write_ply(mesh, ascii ? PlyFormat::ascii : PlyFormat::binary_little_endian));
      } else {
        return usage("output must end in .ply or .stl: " + convert_out);
      }
      return kExitOk;
    }
  } catch (const StageError& e) {
    err << "error: stage " << e.what() << "\n";
    return kExitStageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitStageError;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace turnscan
