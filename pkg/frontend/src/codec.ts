/**
 * Client-side motion-code validation, mirroring the server's parser rules:
 * five groups of widths 3-1-2-2-1, interaction in {000,100,101,110,111},
 * DOF groups in {00,01,11}, binary characters only.
 */

export const GROUP_WIDTHS = [3, 1, 2, 2, 1] as const;
export const INTERACTIONS = ["000", "100", "101", "110", "111"] as const;
export const DOF_GROUPS = ["00", "01", "11"] as const;
export const CODE_BITS = 9;

export type CodeErrorKind =
  | "WrongLength"
  | "NonBinaryCharacter"
  | "InvalidInteraction"
  | "InvalidGroup";

export class CodeError extends Error {
  readonly kind: CodeErrorKind;

  constructor(kind: CodeErrorKind, message: string) {
    super(message);
    this.kind = kind;
    this.name = "CodeError";
  }
}

function splitGroups(text: string): string[] {
  if (text.includes("-")) {
    const groups = text.split("-");
    const widthsOk =
      groups.length === GROUP_WIDTHS.length &&
      groups.every((g, i) => g.length === GROUP_WIDTHS[i]);
    if (!widthsOk) {
      throw new CodeError("WrongLength", `expected groups of widths 3-1-2-2-1, got "${text}"`);
    }
    return groups;
  }
  if (text.length !== CODE_BITS) {
    throw new CodeError("WrongLength", `expected ${CODE_BITS} bits, got ${text.length}`);
  }
  const groups: string[] = [];
  let pos = 0;
  for (const width of GROUP_WIDTHS) {
    groups.push(text.slice(pos, pos + width));
    pos += width;
  }
  return groups;
}

/** Validate a code in either textual form; returns its five groups. */
export function parseCode(text: string): string[] {
  const groups = splitGroups(text);
  if (groups.some((g) => [...g].some((ch) => ch !== "0" && ch !== "1"))) {
    throw new CodeError("NonBinaryCharacter", `non-binary character in "${text}"`);
  }
  if (!INTERACTIONS.includes(groups[0] as (typeof INTERACTIONS)[number])) {
    throw new CodeError("InvalidInteraction", `invalid interaction group "${groups[0]}"`);
  }
  for (const i of [2, 3]) {
    if (!DOF_GROUPS.includes(groups[i] as (typeof DOF_GROUPS)[number])) {
      throw new CodeError("InvalidGroup", `invalid DOF group "${groups[i]}"`);
    }
  }
  return groups;
}

/** Canonical hyphenated form, e.g. "111-0-01-00-1". */
export function canonical(text: string): string {
  return parseCode(text).join("-");
}

/** Compact 9-character form, e.g. "111001001". */
export function compact(text: string): string {
  return parseCode(text).join("");
}

export function isValid(text: string): boolean {
  try {
    parseCode(text);
    return true;
  } catch (err) {
    if (err instanceof CodeError) return false;
    throw err;
  }
}
