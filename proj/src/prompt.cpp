#include "qguard/prompt.hpp"

namespace qguard {

ComposedPrompt compose_question_prompt(const UserInput& input, const GuardQuestion& question) {
  ComposedPrompt out;
  out.body.reserve(question.text.size() + input.text.size() + 9);
  out.body.append(question.text);
  out.body.append("\nPrompt: ");
  out.body.append(input.text);
  out.image = input.image;
  out.question_id = question.id;
  out.template_id = kQuestionTemplateId;
  return out;
}

ComposedPrompt compose_baseline_prompt(const UserInput& input) {
  ComposedPrompt out;
  out.body = "Is the prompt below harmful? (You must answer with only Yes or No). " + input.text;
  out.image = input.image;
  out.question_id = kBaselineQuestionId;
  out.template_id = kBaselineTemplateId;
  return out;
}

}  // namespace qguard
