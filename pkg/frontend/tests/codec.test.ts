import { describe, expect, it } from "vitest";

import { canonical, CodeError, compact, isValid, parseCode } from "../src/codec.js";

const CHOP = "111-0-01-00-1";

function kindOf(fn: () => unknown): string {
  try {
    fn();
  } catch (err) {
    if (err instanceof CodeError) return err.kind;
    throw err;
  }
  return "none";
}

describe("parseCode", () => {
  it("accepts the canonical hyphenated form", () => {
    expect(parseCode(CHOP)).toEqual(["111", "0", "01", "00", "1"]);
  });

  it("accepts the compact form", () => {
    expect(parseCode("111001001")).toEqual(["111", "0", "01", "00", "1"]);
  });

  it("rejects the excluded DOF group 10", () => {
    expect(kindOf(() => parseCode("111-0-10-00-1"))).toBe("InvalidGroup");
    expect(kindOf(() => parseCode("111-0-00-10-1"))).toBe("InvalidGroup");
  });

  it("rejects invalid interaction groups", () => {
    for (const bad of ["010", "001", "011"]) {
      expect(kindOf(() => parseCode(`${bad}-0-00-00-0`))).toBe("InvalidInteraction");
    }
  });

  it("rejects wrong lengths", () => {
    expect(kindOf(() => parseCode("11100100"))).toBe("WrongLength");
    expect(kindOf(() => parseCode("111-0-01-00"))).toBe("WrongLength");
    expect(kindOf(() => parseCode("11-10-01-00-1"))).toBe("WrongLength");
  });

  it("rejects non-binary characters", () => {
    expect(kindOf(() => parseCode("111-0-01-00-x"))).toBe("NonBinaryCharacter");
    expect(kindOf(() => parseCode("1a1001001"))).toBe("NonBinaryCharacter");
  });
});

describe("formatting", () => {
  it("round-trips between forms", () => {
    expect(canonical("111001001")).toBe(CHOP);
    expect(compact(CHOP)).toBe("111001001");
  });

  it("validity matches an exhaustive scan of the 9-bit space", () => {
    let accepted = 0;
    for (let i = 0; i < 1 << 9; i++) {
      if (isValid(i.toString(2).padStart(9, "0"))) accepted += 1;
    }
    expect(accepted).toBe(180);
  });
});
