import { describe, it, expect } from "vitest";
import { parseCsv, numericColumn, stringColumn, columnIndex } from "../src/csv";

const SAMPLE = [
  "alpha,n,estimator,mean,table_digest",
  "0.9,8,log Z,0.325,abcd1234",
  "0.9,16,log Z,0.180,ffff0000",
  "",
].join("\n");

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv(SAMPLE);
    expect(t.header).toEqual(["alpha", "n", "estimator", "mean",
                              "table_digest"]);
    expect(t.rows).toHaveLength(2);
    expect(t.rows[1][1]).toBe("16");
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(/ragged/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });
});

describe("columns", () => {
  const t = parseCsv(SAMPLE);

  it("extracts numeric columns", () => {
    expect(numericColumn(t, "n")).toEqual([8, 16]);
    expect(numericColumn(t, "mean")).toEqual([0.325, 0.18]);
  });

  it("extracts string columns", () => {
    expect(stringColumn(t, "table_digest")).toEqual(["abcd1234", "ffff0000"]);
  });

  it("errors on a missing column", () => {
    expect(() => columnIndex(t, "stderr")).toThrow(/stderr/);
  });

  it("errors on non-numeric cells", () => {
    expect(() => numericColumn(t, "estimator")).toThrow(/non-numeric/);
  });
});
