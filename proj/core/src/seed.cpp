// Copyright 2026 The spmdw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spmdw/seed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spmdw/digest.hpp"

namespace spmdw {

namespace {

struct CityDef {
  const char* id;
  const char* name;
  const char* districts[2][2];  // id suffix, name
};

constexpr CityDef kCities[] = {
    {"jkt-pusat", "Jakarta Pusat", {{"gambir", "Gambir"}, {"tanah-abang", "Tanah Abang"}}},
    {"jkt-utara", "Jakarta Utara", {{"koja", "Koja"}, {"cilincing", "Cilincing"}}},
    {"jkt-barat", "Jakarta Barat", {{"grogol", "Grogol Petamburan"}, {"kebon-jeruk", "Kebon Jeruk"}}},
    {"jkt-selatan", "Jakarta Selatan", {{"kebayoran-baru", "Kebayoran Baru"}, {"tebet", "Tebet"}}},
    {"jkt-timur", "Jakarta Timur", {{"matraman", "Matraman"}, {"cakung", "Cakung"}}},
    {"kep-seribu", "Kepulauan Seribu",
     {{"seribu-utara", "Kepulauan Seribu Utara"}, {"seribu-selatan", "Kepulauan Seribu Selatan"}}},
};

struct ProgramDef {
  const char* code;
  SpmCategory category;
  const char* program;
  const char* served;
  const char* target;
};

constexpr ProgramDef kPrograms[] = {
    {"anc", SpmCategory::AntenatalCare, "Antenatal care", "Pregnant women given antenatal care",
     "Pregnant women"},
    {"delivery", SpmCategory::DeliveryCare, "Delivery care", "Deliveries at a health facility",
     "Expected deliveries"},
    {"newborn", SpmCategory::NewbornCare, "Newborn care", "Newborns given neonatal visits",
     "Live births"},
    {"under5", SpmCategory::UnderFiveCare, "Under-five care", "Children under five monitored",
     "Children under five"},
    {"school", SpmCategory::SchoolAge, "School-age screening", "Pupils screened",
     "Pupils enrolled"},
    {"productive", SpmCategory::ProductiveAge, "Productive-age screening",
     "Adults 15-59 screened", "Adults 15-59"},
    {"elderly", SpmCategory::Elderly, "Elderly screening", "Elderly screened", "Elderly residents"},
    {"hypertension", SpmCategory::Hypertension, "Hypertension care",
     "Hypertensive patients treated", "Estimated hypertensive patients"},
    {"diabetes", SpmCategory::Diabetes, "Diabetes care", "Diabetic patients treated",
     "Estimated diabetic patients"},
    {"mental", SpmCategory::SevereMentalDisorder, "Mental health",
     "Severe mental disorder patients served", "Estimated severe mental disorder patients"},
    {"tb", SpmCategory::Tuberculosis, "Tuberculosis", "Suspected TB cases examined",
     "Suspected TB cases"},
    {"hiv", SpmCategory::HivRisk, "HIV screening", "At-risk people tested for HIV",
     "At-risk people"},
};

constexpr const char* kExtraElement = "hypertension-mean-sbp";

}  // namespace

std::string seed_password(const std::string& user_id) { return user_id + "-pw"; }

std::string seed_pic_id(const std::string& org_unit_id) { return "pic-" + org_unit_id; }

Metadata seed_metadata(const SeedOptions& options) {
  Metadata::Parts parts;
  parts.org_units.push_back({"jkt", "DKI Jakarta", OrgLevel::Province, std::nullopt});
  for (const auto& city : kCities) {
    parts.org_units.push_back({city.id, city.name, OrgLevel::AdminCity, "jkt"});
    for (const auto& d : city.districts) {
      std::string did = std::string(city.id) + "-" + d[0];
      parts.org_units.push_back({did, std::string("Kecamatan ") + d[1], OrgLevel::District, city.id});
      for (int k = 1; k <= 4; ++k) {
        parts.org_units.push_back({did + "-" + std::to_string(k),
                                   std::string("Kelurahan ") + d[1] + " " + std::to_string(k),
                                   OrgLevel::Subdistrict, did});
      }
    }
  }

  for (const auto& p : kPrograms) {
    std::string code = p.code;
    parts.programs.push_back({"p-" + code, p.program});
    DataElement served{code + "-served", p.served, ValueType::NonNegativeInteger,
                       ValueRange{0, 100000}, "p-" + code, Aggregation::Sum};
    DataElement target{code + "-target", p.target, ValueType::NonNegativeInteger,
                       ValueRange{0, 100000}, "p-" + code, Aggregation::Sum};
    DataSet ds;
    ds.id = "ds-" + code;
    ds.name = std::string(p.program) + " monthly report";
    ds.period_type = PeriodType::Month;
    ds.element_ids = {served.id, target.id};
    if (code == "hypertension") {
      parts.elements.push_back({kExtraElement, "Mean systolic blood pressure of treated patients",
                                ValueType::Decimal, ValueRange{60, 250}, "p-" + code,
                                Aggregation::Average});
      ds.element_ids.push_back(kExtraElement);
    }
    std::sort(ds.element_ids.begin(), ds.element_ids.end());
    ds.entry_level = options.entry_level;
    ds.deadline_days = options.deadline_days;
    parts.datasets.push_back(std::move(ds));
    parts.indicators.push_back({"ind-" + code, std::string(p.served) + " (%)", served.id, target.id,
                                100.0, p.category, true});
    parts.elements.push_back(std::move(served));
    parts.elements.push_back(std::move(target));
  }

  auto make_user = [&](std::string id, std::string name, Role role,
                       std::vector<std::string> scope) {
    User u;
    u.id = std::move(id);
    u.name = std::move(name);
    u.role = role;
    u.scope_org_unit_ids = std::move(scope);
    u.credential = hash_password(seed_password(u.id), options.password_iterations,
                                 sha256_hex(u.id).substr(0, 32));
    parts.users.push_back(std::move(u));
  };
  make_user("admin", "System administrator", Role::Admin, {});
  make_user("dinkes", "Jakarta Department of Health", Role::DepartmentManager, {"jkt"});
  for (const auto& city : kCities) {
    make_user(std::string("sudinkes-") + city.id, std::string("Sudinkes ") + city.name,
              Role::SubofficeManager, {city.id});
  }
  std::vector<OrgUnit> units = parts.org_units;
  for (const auto& u : units) {
    if (u.level != options.entry_level) continue;
    make_user(seed_pic_id(u.id), "PIC " + u.name, Role::EnumeratorPic, {u.id});
  }
  return Metadata::build(std::move(parts));
}

FormSubmission generate_form(const Metadata& md, const DataSet& ds, const std::string& org_unit_id,
                             const Period& period, std::mt19937_64& rng) {
  FormSubmission s;
  s.dataset_id = ds.id;
  s.org_unit_id = org_unit_id;
  s.period = period.key();
  s.program_id = md.element(ds.element_ids.front()).owner_program_id;
  for (const auto& el : ds.element_ids) {
    if (s.values.count(el)) continue;
    const DataElement& e = md.element(el);
    const Indicator* ind = nullptr;
    for (const auto& i : md.parts().indicators) {
      if (i.denominator_element_id == el && ds.contains(i.numerator_element_id)) ind = &i;
    }
    auto range = e.effective_range();
    double lo = range ? range->min : 0, hi = range ? range->max : 1000;
    if (ind) {
      auto target = std::uniform_int_distribution<int>(50, 500)(rng);
      s.values[el] = target;
      s.values[ind->numerator_element_id] = std::uniform_int_distribution<int>(0, target)(rng);
    } else if (e.value_type == ValueType::NonNegativeInteger) {
      s.values[el] = std::uniform_int_distribution<int>(0, 1000)(rng);
    } else {
      double mid = lo + (hi - lo) * 0.4;
      double v = std::uniform_real_distribution<double>(mid - (hi - lo) * 0.1,
                                                        mid + (hi - lo) * 0.1)(rng);
      s.values[el] = std::round(v * 10) / 10;
    }
  }
  return s;
}

std::vector<FormSubmission> generate_submissions(const Metadata& md, const Period& period,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FormSubmission> out;
  for (const OrgUnit* unit : md.tree().preorder()) {
    for (const auto& ds : md.parts().datasets) {
      if (ds.entry_level != unit->level || ds.period_type != period.type()) continue;
      out.push_back(generate_form(md, ds, unit->id, period, rng));
    }
  }
  return out;
}

}  // namespace spmdw
