const CONTRACT_ADDRESS = "0xe9aa6a088958b1644177e53d1015dcc530a1a1fe";
async function mint() {
  const [from] = await window.ethereum.request({ method: "eth_requestAccounts" });
  return window.ethereum.request({ method: "eth_sendTransaction", params: [{ from, to: CONTRACT_ADDRESS, value: price }] });
}
