#include "shadecal/profile_io.hpp"

#include "shadecal/error.hpp"
#include "shadecal/fileio.hpp"

namespace shadecal {

using nlohmann::json;

namespace {

json curve_to_json(const ChannelCurve& c) { return json{{"gain", c.gain}, {"gamma", c.gamma}, {"offset", c.offset}}; }

ChannelCurve curve_from_json(const json& j) {
  return {j.at("gain").get<double>(), j.at("gamma").get<double>(), j.at("offset").get<double>()};
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v(0), v(1), v(2)}); }

Eigen::Vector3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Parse, "profile: expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json profile_to_json(const CalibrationProfile& profile) {
  json sets = json::array();
  for (int s = 0; s < kNumSets; ++s) {
    json set{{"index", s + 1}, {"centroid", vec3_to_json(profile.groups.centroids[s])}};
    json members = json::array();
    for (const auto& [id, group] : profile.groups.membership) {
      if (group == s) members.push_back(id);
    }
    set["patch_ids"] = members;
    if (profile.transforms[s]) {
      const auto& t = *profile.transforms[s];
      json rows = json::array();
      for (int r = 0; r < 3; ++r) {
        json row = json::array();
        for (int c = 0; c < kNumPolyTerms; ++c) row.push_back(t.matrix(r, c));
        rows.push_back(row);
      }
      set["basis"] = basis_name(t.basis);
      set["matrix"] = rows;
    } else {
      set["basis"] = nullptr;
      set["matrix"] = nullptr;
    }
    sets.push_back(set);
  }

  json patches = json::array();
  for (const auto& d : profile.diagnostics) patches.push_back(json{{"patch_id", d.patch_id}, {"delta_e76", d.delta_e}});

  return json{
      {"format", "shadecal-profile/1"},
      {"source_id", profile.source_id},
      {"white_point", vec3_to_json(profile.white.xyz())},
      {"gray_balance", {{"r", curve_to_json(profile.gray.r)}, {"g", curve_to_json(profile.gray.g)}, {"b", curve_to_json(profile.gray.b)}}},
      {"grouping", profile.groups.skin_rule ? "skin-distance+kmeans2" : "kmeans3"},
      {"sets", sets},
      {"diagnostics", {{"per_patch", patches}, {"mean_delta_e76", profile.mean_delta_e}, {"outlier", profile.outlier}}},
  };
}

CalibrationProfile profile_from_json(const json& j) {
  try {
    CalibrationProfile p;
    p.source_id = j.value("source_id", std::string());
    const auto w = vec3_from_json(j.at("white_point"));
    p.white = {w(0), w(1), w(2)};
    if (!p.white.valid()) throw Error(ErrorKind::Parse, "profile: invalid white point");
    const auto& g = j.at("gray_balance");
    p.gray.r = curve_from_json(g.at("r"));
    p.gray.g = curve_from_json(g.at("g"));
    p.gray.b = curve_from_json(g.at("b"));
    if (!p.gray.valid()) throw Error(ErrorKind::Parse, "profile: invalid gray balance parameters");
    p.groups.skin_rule = j.value("grouping", std::string()) == "skin-distance+kmeans2";

    const auto& sets = j.at("sets");
    if (!sets.is_array() || sets.size() != kNumSets) throw Error(ErrorKind::Parse, "profile: expected 3 sets");
    for (int s = 0; s < kNumSets; ++s) {
      const auto& set = sets[s];
      p.groups.centroids[s] = DeviceRGB(vec3_from_json(set.at("centroid")));
      for (int id : set.at("patch_ids").get<std::vector<int>>()) p.groups.membership[id] = s;
      if (!set.at("matrix").is_null()) {
        TransformMatrix t;
        t.basis = parse_basis(set.at("basis").get<std::string>());
        const auto& rows = set.at("matrix");
        if (rows.size() != 3) throw Error(ErrorKind::Parse, "profile: matrix must have 3 rows");
        for (int r = 0; r < 3; ++r) {
          if (rows[r].size() != kNumPolyTerms) throw Error(ErrorKind::Parse, "profile: matrix rows must have 11 entries");
          for (int c = 0; c < kNumPolyTerms; ++c) t.matrix(r, c) = rows[r][c].get<double>();
        }
        if (!t.matrix.allFinite()) throw Error(ErrorKind::Parse, "profile: non-finite matrix entry");
        p.transforms[s] = t;
      }
    }
    if (!p.transforms[0] && !p.transforms[1] && !p.transforms[2]) throw Error(ErrorKind::Parse, "profile: no transforms");

    const auto& diag = j.at("diagnostics");
    for (const auto& d : diag.at("per_patch")) p.diagnostics.push_back({d.at("patch_id").get<int>(), d.at("delta_e76").get<double>()});
    p.mean_delta_e = diag.at("mean_delta_e76").get<double>();
    p.outlier = diag.at("outlier").get<bool>();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("profile: ") + e.what());
  }
}

CalibrationProfile load_profile(const std::filesystem::path& path) {
  try {
    return profile_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace shadecal
