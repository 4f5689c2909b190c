/**
 * CamelCase splitting, matching the consumer pipeline's rule: runs of
 * alphanumerics are cut at lower-to-upper boundaries, acronym-to-word
 * boundaries ("HTTPServer" -> "HTTP", "Server") and letter/digit
 * transitions; every other character separates runs.
 */

const SEGMENT = /[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|[0-9]+/g;
const RUN = /[A-Za-z0-9]+/g;

export function splitCamelCase(text: string): string[] {
  const tokens: string[] = [];
  for (const run of text.match(RUN) ?? []) {
    for (const segment of run.match(SEGMENT) ?? []) {
      tokens.push(segment);
    }
  }
  return tokens;
}
