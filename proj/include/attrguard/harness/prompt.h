// Copyright 2026 The Attrguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Attribute-inference prompt construction: prefix, formatted comments,
// suffix. Comment text is inserted verbatim after the template placeholders
// have been bound.

#ifndef ATTRGUARD_HARNESS_PROMPT_H_
#define ATTRGUARD_HARNESS_PROMPT_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attrguard/corpus/profile.h"
#include "attrguard/harness/templates.h"
#include "attrguard/status.h"
#include "attrguard/util/strings.h"

namespace attrguard {

enum class CommentFormat { kDatePrefixed };

struct PromptTemplate {
  std::string system_text{templates::kInferenceSystem};
  std::string prefix_text{templates::kInferencePrefix};
  CommentFormat format = CommentFormat::kDatePrefixed;
  std::string suffix_text{templates::kInferenceSuffix};
};

inline PromptTemplate InferenceTemplate() { return {}; }

// The inference template with an added certainty line.
inline PromptTemplate AdversaryTemplate() {
  PromptTemplate t;
  t.suffix_text = std::string(templates::kAdversarySuffix);
  return t;
}

struct RenderedPrompt {
  std::string system;
  std::string user;

  std::string Flat() const { return FlattenPrompt(system, user); }
};

// One "YYYY-MM-DD: text" line per comment.
inline std::string FormatComments(const std::vector<Comment>& comments,
                                  CommentFormat format =
                                      CommentFormat::kDatePrefixed) {
  std::vector<std::string> lines;
  lines.reserve(comments.size());
  for (const auto& c : comments) {
    switch (format) {
      case CommentFormat::kDatePrefixed:
        lines.push_back(c.date + ": " + c.text);
        break;
    }
  }
  return Join(lines, "\n");
}

inline TemplateBindings AttributeBindings(const AttributeSpec& attribute) {
  return {{"target attribute", attribute.label},
          {"target attribute options", attribute.OptionsText()}};
}

inline RenderedPrompt BuildInferencePrompt(const std::vector<Comment>& comments,
                                           const AttributeSpec& attribute,
                                           const PromptTemplate& tmpl) {
  if (comments.empty()) {
    throw Error(ErrorCode::kEmptyInput, "profile has no comments");
  }
  TemplateBindings b = AttributeBindings(attribute);
  RenderedPrompt out;
  out.system = RenderTemplate(tmpl.system_text, b);
  out.user = RenderTemplate(tmpl.prefix_text, b) +
             FormatComments(comments, tmpl.format) +
             RenderTemplate(tmpl.suffix_text, b);
  return out;
}

inline RenderedPrompt BuildInferencePrompt(const Profile& profile,
                                           const AttributeSpec& attribute,
                                           const PromptTemplate& tmpl) {
  return BuildInferencePrompt(profile.comments, attribute, tmpl);
}

// Renders the inference prompt for edited versions of one profile's text.
// Lines of the edited text keep the dates of the original comments.
class PromptContext {
 public:
  PromptContext(std::vector<Comment> comments, AttributeSpec attribute,
                PromptTemplate tmpl = InferenceTemplate())
      : comments_(std::move(comments)),
        attribute_(std::move(attribute)),
        template_(std::move(tmpl)) {}

  const AttributeSpec& attribute() const { return attribute_; }
  const std::vector<Comment>& comments() const { return comments_; }

  std::string Render(std::string_view text) const {
    return BuildInferencePrompt(WithText(comments_, text), attribute_,
                                template_)
        .Flat();
  }

 private:
  std::vector<Comment> comments_;
  AttributeSpec attribute_;
  PromptTemplate template_;
};

}  // namespace attrguard

#endif  // ATTRGUARD_HARNESS_PROMPT_H_
