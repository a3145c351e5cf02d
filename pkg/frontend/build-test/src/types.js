// Wire types mirroring the service's JSON schemas (schemas/ in the
// repository root).
export {};
