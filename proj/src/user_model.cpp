#include "promind/user_model.hpp"

#include <algorithm>

#include "promind/codec.hpp"
#include "promind/error.hpp"

namespace promind {

namespace {

double update(double score, bool used_high_side, double outcome, double alpha) {
  const double directed = used_high_side ? outcome : 1.0 - outcome;
  return std::clamp((1.0 - alpha) * score + alpha * directed, 0.0, 1.0);
}

}  // namespace

PreferenceState record_interaction(const PreferenceState& pref, const InteractionRecord& rec,
                                   double alpha) {
  const double outcome = rec.response == UserResponse::Kind::Accept ? 1.0 : 0.0;
  PreferenceState next = pref;
  next.channel = update(pref.channel, rec.modality_used.channel == Channel::Audio, outcome, alpha);
  next.duration = update(pref.duration, rec.modality_used.duration == Length::Long, outcome, alpha);
  next.sound = update(pref.sound, rec.modality_used.sound == Sound::Music, outcome, alpha);
  ++next.sample_count;
  return next;
}

ReminderPlan adapt_plan(const ReminderPlan& plan, const PreferenceState& pref, double lambda) {
  if (lambda == 0.0) return plan;
  const ModalityScore& raw = plan.raw_modality_score;
  const ModalityScore blended{(1.0 - lambda) * raw.channel + lambda * pref.channel,
                              (1.0 - lambda) * raw.duration + lambda * pref.duration,
                              (1.0 - lambda) * raw.sound + lambda * pref.sound};
  ReminderPlan out = plan;
  out.modality = decode_modality(blended);
  return out;
}

std::string export_preferences(const PreferenceState& pref) {
  nlohmann::json j = pref;
  j["version"] = 1;
  return j.dump();
}

PreferenceState import_preferences(const std::string& text) {
  try {
    return nlohmann::json::parse(text).get<PreferenceState>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, std::string("malformed preference record: ") + e.what());
  }
}

}  // namespace promind
