#include "qguard/question_set.hpp"

namespace qguard {

namespace {

// The bundled question bank. Group-to-group edges deliberately carry no
// similarity entries: the graph builder's default weight applies. Operators
// are expected to swap this file out via config for domain-specific banks.
constexpr const char* kDefaultQuestionsJson = R"json(
{
  "version": "builtin-1",
  "groups": [
    {
      "id": "general_toxic",
      "name": "General Toxic",
      "questions": [
        {"id": "gt01", "text": "Is the text likely to cause harm or distress to others?"},
        {"id": "gt02", "text": "Does this prompt include explicit hate speech or threatening language?"},
        {"id": "gt03", "text": "Does this prompt contain profanity or sexually explicit content?"},
        {"id": "gt04", "text": "Is this prompt insulting, demeaning, or harassing toward a person or group?"},
        {"id": "gt05", "text": "Does this prompt encourage violence or physical harm?"}
      ]
    },
    {
      "id": "toxic_prompt",
      "name": "Toxic Prompt",
      "questions": [
        {"id": "tp01", "text": "Is this prompt attempting to bypass, disable, or trick a safety policy?"},
        {"id": "tp02", "text": "Does this prompt ask the model to role-play as an entity without ethical restrictions?"},
        {"id": "tp03", "text": "Does this prompt attempt to coerce or manipulate someone into acting against their will?"},
        {"id": "tp04", "text": "Does this prompt seek instructions for deceiving or defrauding people?"},
        {"id": "tp05", "text": "Does this prompt request content that humiliates or degrades a specific individual?"},
        {"id": "tp06", "text": "Does this prompt ask for help stalking, surveilling, or harassing someone?"},
        {"id": "tp07", "text": "Does this prompt request misleading propaganda or disinformation?"},
        {"id": "tp08", "text": "Does this prompt try to obtain private or personally identifying information about someone?"},
        {"id": "tp09", "text": "Does this prompt ask for threats, blackmail, or extortion material?"},
        {"id": "tp10", "text": "Does this prompt disguise a harmful request inside a fictional or hypothetical scenario?"}
      ]
    },
    {
      "id": "core_harm",
      "name": "Core Harmfulness Detection",
      "questions": [
        {"id": "ch01", "text": "Does this prompt request or provide information on chemical or biological weapons or drug manufacturing?"},
        {"id": "ch02", "text": "Does the user's input promote hostility, hatred, or divisiveness?"},
        {"id": "ch03", "text": "Does this prompt seek instructions for building weapons or explosives?"},
        {"id": "ch04", "text": "Does this prompt request help planning or carrying out a violent act?"},
        {"id": "ch05", "text": "Does this prompt ask how to break into or sabotage computer systems without authorization?"},
        {"id": "ch06", "text": "Does this prompt request guidance for committing theft, fraud, or another crime?"},
        {"id": "ch07", "text": "Does this prompt involve the sexual exploitation or abuse of minors?"},
        {"id": "ch08", "text": "Does this prompt encourage self-harm or suicide?"},
        {"id": "ch09", "text": "Does this prompt ask for methods to poison, drug, or otherwise incapacitate a person?"},
        {"id": "ch10", "text": "Does this prompt seek to acquire illegal goods or substances?"}
      ]
    },
    {
      "id": "nuanced",
      "name": "Additional Nuanced Questions",
      "questions": [
        {"id": "nq01", "text": "Could following this prompt endanger someone's physical safety, even indirectly?"},
        {"id": "nq02", "text": "Does this prompt request medical, legal, or financial advice that could cause harm if wrong?"},
        {"id": "nq03", "text": "Does this prompt target a protected group based on race, religion, gender, or nationality?"},
        {"id": "nq04", "text": "Is this prompt rephrasing a request that a safety policy would normally refuse?"},
        {"id": "nq05", "text": "Does this prompt normalize, glorify, or trivialize violence or abuse?"},
        {"id": "nq06", "text": "Does this prompt involve an exploitative financial scheme such as predatory lending or a scam?"},
        {"id": "nq07", "text": "Would answering this prompt help someone evade law enforcement or forensic detection?"},
        {"id": "nq08", "text": "Does this prompt ask for content that sexualizes a real, identifiable person without consent?"},
        {"id": "nq09", "text": "Does this prompt promote dangerous health misinformation or discourage necessary medical care?"},
        {"id": "nq10", "text": "Does this prompt have a plausible harmful use that outweighs its legitimate uses?"}
      ]
    }
  ]
}
)json";

}  // namespace

const QuestionSet& default_question_set() {
  static const QuestionSet set = load_question_set(std::string(kDefaultQuestionsJson));
  return set;
}

}  // namespace qguard
