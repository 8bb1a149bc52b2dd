const CONTRACT_ADDRESS = "0x56dd796f0dcf861e159a3098dd6761eb0d64077a";
const ABI = ["function safeTransferFrom(address from, address to, uint256 tokenId)"];
async function mint() {
  const [from] = await window.ethereum.request({ method: "eth_requestAccounts" });
  const tx = { from, to: CONTRACT_ADDRESS, value: mintPrice, data: mintData() };
  return window.ethereum.request({ method: "eth_sendTransaction", params: [tx] });
}
