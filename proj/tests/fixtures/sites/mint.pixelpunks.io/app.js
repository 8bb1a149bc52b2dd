const CONTRACT_ADDRESS = "0xe5d0c765cb6bdeb1b1b4914cf192512ccba76fc5";
async function mint() {
  const [from] = await window.ethereum.request({ method: "eth_requestAccounts" });
  const tx = { from, to: CONTRACT_ADDRESS, value: mintPrice, data: mintData() };
  return window.ethereum.request({ method: "eth_sendTransaction", params: [tx] });
}
