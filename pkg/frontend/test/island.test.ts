import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { EAParams } from "../src/engine.js";
import { NullTransport, runBrowserIsland } from "../src/island.js";

const fixture = JSON.parse(
  readFileSync(fileURLToPath(new URL("./fixtures/island_trace.json", import.meta.url)), "utf-8"),
);

function fixtureParams(): EAParams {
  return {
    populationSize: fixture.population,
    eliteSize: fixture.elite,
    tournamentSize: fixture.tournament,
    crossoverRate: fixture.crossoverRate,
    mutationRate: null,
    migrationPeriod: fixture.migrationPeriod,
    maxGenerations: 20000,
  };
}

describe("browser island vs native island", () => {
  it("produces the identical best-fitness trace for the shared seed", async () => {
    const spec = { trapLength: fixture.trapLength, trapCount: fixture.trapCount };
    const report = await runBrowserIsland(
      fixtureParams(),
      spec,
      new NullTransport(),
      fixture.seed,
    );
    expect(report.solved).toBe(fixture.solved);
    expect(report.generations).toBe(fixture.generations);
    expect(report.migrationsSent).toBe(fixture.migrationsSent);
    expect(report.trace).toEqual(fixture.trace);
  });

  it("keeps the rendered series non-decreasing", async () => {
    const spec = { trapLength: fixture.trapLength, trapCount: fixture.trapCount };
    const report = await runBrowserIsland(
      fixtureParams(),
      spec,
      new NullTransport(),
      fixture.seed,
    );
    for (let i = 1; i < report.trace.length; i++) {
      expect(report.trace[i][1]).toBeGreaterThanOrEqual(report.trace[i - 1][1]);
    }
    const last = report.trace[report.trace.length - 1];
    expect(last[1]).toBe(spec.trapLength * spec.trapCount); // solved run ends at the optimum
  });

  it("malformed server replies are discarded, not fatal", async () => {
    const garbage = {
      sendOne: async () => {},
      fetchRandom: async () => "01xx-not-a-chromosome",
    };
    const params = fixtureParams();
    params.maxGenerations = 300;
    params.migrationPeriod = 100;
    const report = await runBrowserIsland(
      params,
      { trapLength: 8, trapCount: 30 },
      garbage,
      3,
    );
    expect(report.migrationsReceived).toBe(0);
    expect(report.migrationsDiscarded).toBeGreaterThan(0);
    expect(report.generations).toBe(300);
  });

  it("an all-ones immigrant ends the run", async () => {
    const solution = "1".repeat(40);
    const transport = {
      sendOne: async () => {},
      fetchRandom: async () => solution,
    };
    const params = fixtureParams();
    const report = await runBrowserIsland(params, { trapLength: 4, trapCount: 10 }, transport, 2);
    expect(report.solved).toBe(true);
    expect(report.generations % params.migrationPeriod === 0 || report.migrationsReceived === 0).toBe(
      true,
    );
  });
});
