export class SchemaError extends Error {}

export class RefusalError extends Error {}
